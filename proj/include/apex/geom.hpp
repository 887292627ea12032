#pragma once

#include <cmath>
#include <numbers>

namespace apex {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp_left(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 normalized(Vec2 a) {
  double n = norm(a);
  return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}

inline Vec2 rotate(Vec2 a, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Parameter of the closest point to q on segment [a, b], clamped to [0, 1].
inline double segment_closest_t(Vec2 a, Vec2 b, Vec2 q) {
  Vec2 d = b - a;
  double len_sq = norm_sq(d);
  if (len_sq <= 0.0) return 0.0;
  double t = dot(q - a, d) / len_sq;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return t;
}

// Distance along the ray (origin, dir) to segment [a, b]; negative if no hit.
// dir must be unit length.
inline double ray_segment_distance(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  Vec2 seg = b - a;
  double denom = cross(dir, seg);
  if (denom == 0.0) return -1.0;  // parallel
  Vec2 rel = a - origin;
  double t = cross(rel, seg) / denom;
  double u = cross(rel, dir) / denom;
  if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
  return -1.0;
}

// True if two closed segments [a1,b1] and [a2,b2] intersect.
inline bool segments_intersect(Vec2 a1, Vec2 b1, Vec2 a2, Vec2 b2) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    double v = cross(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  int o1 = orient(a1, b1, a2);
  int o2 = orient(a1, b1, b2);
  int o3 = orient(a2, b2, a1);
  int o4 = orient(a2, b2, b1);
  if (o1 != o2 && o3 != o4) return true;
  auto on_seg = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && on_seg(a1, b1, a2)) return true;
  if (o2 == 0 && on_seg(a1, b1, b2)) return true;
  if (o3 == 0 && on_seg(a2, b2, a1)) return true;
  if (o4 == 0 && on_seg(a2, b2, b1)) return true;
  return false;
}

}  // namespace apex
