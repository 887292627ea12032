#include "apex/track.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "apex/error.hpp"

namespace apex {
namespace {

constexpr double kDegenerateSq = 1e-18;   // squared length of a collapsed segment
constexpr double kContactWindow = 40.0;   // arclength window for wall-contact queries
constexpr double kContactSlack = 0.25;    // meters of overhang past wall segment ends

uint64_t fnv1a(const void* data, size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t hash_geometry(const TrackDefinition& t) {
  uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* p, size_t n) { h = fnv1a(p, n, h); };
  uint8_t closed = t.closed ? 1 : 0;
  mix(&closed, 1);
  auto mix_vecs = [&](const std::vector<Vec2>& v) {
    for (const Vec2& p : v) {
      mix(&p.x, sizeof p.x);
      mix(&p.y, sizeof p.y);
    }
  };
  mix_vecs(t.centerline);
  for (double w : t.half_width) mix(&w, sizeof w);
  mix_vecs(t.left_wall);
  mix_vecs(t.right_wall);
  return h;
}

struct Candidate {
  double dist_sq = std::numeric_limits<double>::infinity();
  int idx = -1;
  double t = 0.0;
  Vec2 point;
};

// Evaluates segment i against query q; strict `<` keeps the lowest segment
// index among exact ties when segments are scanned in ascending order.
void consider_segment(const TrackDefinition& track, Vec2 q, int i,
                      Candidate& best) {
  Vec2 a = track.segment_start(i);
  Vec2 b = track.segment_end(i);
  double t = segment_closest_t(a, b, q);
  Vec2 p = a + (b - a) * t;
  double d2 = norm_sq(q - p);
  if (d2 < best.dist_sq) best = {d2, i, t, p};
}

Candidate scan_all(const TrackDefinition& track, Vec2 q) {
  Candidate best;
  for (int i = 0; i < track.num_segments(); ++i) {
    consider_segment(track, q, i, best);
  }
  return best;
}

// Index of the segment containing arclength s (s already wrapped/clamped).
int segment_of(const TrackDefinition& track, double s) {
  auto it = std::upper_bound(track.arclength.begin(), track.arclength.end(), s);
  int i = static_cast<int>(it - track.arclength.begin()) - 1;
  if (i < 0) i = 0;
  int last = track.num_segments() - 1;
  if (i > last) i = last;
  return i;
}

CenterlineProjection make_projection(const TrackDefinition& track, Vec2 q,
                                     const Candidate& best) {
  CenterlineProjection out;
  out.progress = wrap_progress(
      track, track.segment_arclength(best.idx) +
                 best.t * track.segment_length(best.idx));
  Vec2 seg_dir =
      normalized(track.segment_end(best.idx) - track.segment_start(best.idx));
  double side = cross(seg_dir, q - best.point);
  double dist = std::sqrt(best.dist_sq);
  out.lateral_offset = side >= 0.0 ? dist : -dist;
  out.tangent_heading = tangent_at(track, out.progress);
  return out;
}

// Smallest arclength distance between two progress values.
double progress_distance(const TrackDefinition& track, double a, double b) {
  double d = std::abs(a - b);
  if (track.closed) d = std::min(d, track.total_length - d);
  return d;
}

std::vector<Vec2> offset_wall(const std::vector<Vec2>& c,
                              const std::vector<double>& hw, bool closed,
                              double side) {
  int n = static_cast<int>(c.size());
  std::vector<Vec2> wall(n);
  for (int i = 0; i < n; ++i) {
    Vec2 d_prev, d_next;
    if (closed) {
      d_prev = normalized(c[i] - c[(i + n - 1) % n]);
      d_next = normalized(c[(i + 1) % n] - c[i]);
    } else {
      d_prev = i > 0 ? normalized(c[i] - c[i - 1])
                     : normalized(c[1] - c[0]);
      d_next = i + 1 < n ? normalized(c[i + 1] - c[i]) : d_prev;
    }
    Vec2 bis = perp_left(d_prev) + perp_left(d_next);
    if (norm_sq(bis) < kDegenerateSq) {
      bis = perp_left(d_next);  // guarded against by the turn-angle check
    }
    bis = normalized(bis);
    // Miter compensation keeps the wall at the requested lateral distance
    // through corners; the clamp bounds spikes at sharp joints.
    double cos_half = std::max(0.5, dot(bis, perp_left(d_next)));
    wall[i] = c[i] + bis * (side * hw[i] / cos_half);
  }
  return wall;
}

void append_wall_segments(TrackDefinition& track,
                          const std::vector<Vec2>& wall) {
  int n = static_cast<int>(wall.size());
  if (n < 2) return;
  int count = track.closed ? n : n - 1;
  for (int i = 0; i < count; ++i) {
    Vec2 a = wall[i];
    Vec2 b = wall[(i + 1) % n];
    if (norm_sq(b - a) < kDegenerateSq) continue;
    Vec2 dir = normalized(b - a);
    Vec2 mid = (a + b) * 0.5;
    Candidate near = scan_all(track, mid);
    double anchor = wrap_progress(
        track, track.segment_arclength(near.idx) +
                   near.t * track.segment_length(near.idx));
    Vec2 perp = perp_left(dir);
    Vec2 inward = dot(perp, near.point - mid) >= 0.0 ? perp : perp * -1.0;
    track.wall_segments.push_back({a, b, inward, anchor});
  }
}

void check_wall_clearance(const TrackDefinition& track,
                          const std::vector<Vec2>& wall, const char* name,
                          double min_clearance) {
  int n = static_cast<int>(wall.size());
  int count = track.closed ? n : n - 1;
  for (int p = 0; p < track.num_points(); ++p) {
    Vec2 q = track.centerline[p];
    double best_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
      Vec2 a = wall[i];
      Vec2 b = wall[(i + 1) % n];
      double t = segment_closest_t(a, b, q);
      best_sq = std::min(best_sq, norm_sq(q - (a + (b - a) * t)));
    }
    if (best_sq < min_clearance * min_clearance) {
      std::ostringstream msg;
      msg << "centerline point " << p << " is only " << std::sqrt(best_sq)
          << " m from the " << name << " (minimum clearance "
          << min_clearance << " m)";
      throw ConfigError(msg.str());
    }
  }
}

void check_wall_self_intersection(const std::vector<Vec2>& wall, bool closed,
                                  const char* name) {
  int n = static_cast<int>(wall.size());
  int count = closed ? n : n - 1;
  for (int i = 0; i < count; ++i) {
    for (int j = i + 2; j < count; ++j) {
      if (closed && i == 0 && j == count - 1) continue;  // adjacent at seam
      if (segments_intersect(wall[i], wall[(i + 1) % n], wall[j],
                             wall[(j + 1) % n])) {
        std::ostringstream msg;
        msg << "self-intersecting " << name << " (segments " << i << " and "
            << j << ")";
        throw ConfigError(msg.str());
      }
    }
  }
}

}  // namespace

double TrackDefinition::half_width_at(double progress) const {
  double s = wrap_progress(*this, progress);
  if (!closed && s >= arclength.back()) return half_width.back();
  int i = segment_of(*this, s);
  double len = segment_length(i);
  double t = len > 0.0 ? (s - arclength[i]) / len : 0.0;
  double w0 = half_width[i];
  double w1 = half_width[(i + 1) % num_points()];
  return w0 + (w1 - w0) * t;
}

double circum_curvature(Vec2 p_prev, Vec2 p, Vec2 p_next) {
  Vec2 ab = p - p_prev;
  Vec2 bc = p_next - p;
  Vec2 ca = p_prev - p_next;
  double lab = norm(ab), lbc = norm(bc), lca = norm(ca);
  if (lab < 1e-12 || lbc < 1e-12 || lca < 1e-12) {
    throw std::invalid_argument(
        "circum_curvature requires pairwise-distinct points");
  }
  return 2.0 * cross(ab, bc) / (lab * lbc * lca);
}

double wrap_progress(const TrackDefinition& track, double s) {
  double L = track.total_length;
  if (!track.closed) return std::clamp(s, 0.0, L);
  s = std::fmod(s, L);
  if (s < 0.0) s += L;
  if (s >= L) s = 0.0;
  return s;
}

TrackDefinition build_track(std::vector<Vec2> centerline,
                            std::vector<double> half_width, bool closed,
                            std::vector<Vec2> left_wall,
                            std::vector<Vec2> right_wall,
                            const TrackLoadOptions& opts) {
  int n = static_cast<int>(centerline.size());
  int min_points = closed ? 3 : 2;
  if (n < min_points) {
    std::ostringstream msg;
    msg << "track needs at least " << min_points << " centerline points, got "
        << n;
    throw ConfigError(msg.str());
  }
  if (half_width.size() != centerline.size()) {
    throw ConfigError("half_width count does not match centerline count");
  }
  for (int i = 0; i < n; ++i) {
    if (!(half_width[i] > 0.0)) {
      std::ostringstream msg;
      msg << "non-positive half width at point " << i;
      throw ConfigError(msg.str());
    }
  }

  TrackDefinition t;
  t.centerline = std::move(centerline);
  t.half_width = std::move(half_width);
  t.closed = closed;

  int num_segments = closed ? n : n - 1;
  for (int i = 0; i < num_segments; ++i) {
    Vec2 a = t.centerline[i];
    Vec2 b = t.centerline[(i + 1) % n];
    if (norm_sq(b - a) < kDegenerateSq) {
      std::ostringstream msg;
      msg << "degenerate segment at point " << i;
      throw ConfigError(msg.str());
    }
  }

  // Turn angle between consecutive segment directions.
  int first_vertex = closed ? 0 : 1;
  int last_vertex = closed ? n - 1 : n - 2;
  for (int i = first_vertex; i <= last_vertex; ++i) {
    Vec2 d_in = t.centerline[i] - t.centerline[(i + n - 1) % n];
    Vec2 d_out = t.centerline[(i + 1) % n] - t.centerline[i];
    double angle = std::abs(std::atan2(cross(d_in, d_out), dot(d_in, d_out)));
    if (angle > opts.max_turn_angle + 1e-12) {
      std::ostringstream msg;
      msg << "turning angle " << angle << " rad at point " << i
          << " exceeds the " << opts.max_turn_angle << " rad limit";
      throw ConfigError(msg.str());
    }
  }

  t.arclength.resize(n);
  t.arclength[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    t.arclength[i] = t.arclength[i - 1] + norm(t.centerline[i] - t.centerline[i - 1]);
  }
  t.total_length =
      closed ? t.arclength[n - 1] + norm(t.centerline[0] - t.centerline[n - 1])
             : t.arclength[n - 1];

  t.point_curvature.resize(n);
  if (closed) {
    for (int i = 0; i < n; ++i) {
      t.point_curvature[i] =
          circum_curvature(t.centerline[(i + n - 1) % n], t.centerline[i],
                           t.centerline[(i + 1) % n]);
    }
  } else {
    for (int i = 1; i + 1 < n; ++i) {
      t.point_curvature[i] = circum_curvature(
          t.centerline[i - 1], t.centerline[i], t.centerline[i + 1]);
    }
    t.point_curvature[0] = n > 2 ? t.point_curvature[1] : 0.0;
    t.point_curvature[n - 1] = n > 2 ? t.point_curvature[n - 2] : 0.0;
  }

  if (!left_wall.empty() && left_wall.size() < 2) {
    throw ConfigError("left wall needs at least 2 points");
  }
  if (!right_wall.empty() && right_wall.size() < 2) {
    throw ConfigError("right wall needs at least 2 points");
  }
  t.left_wall = left_wall.empty()
                    ? offset_wall(t.centerline, t.half_width, closed, 1.0)
                    : std::move(left_wall);
  t.right_wall = right_wall.empty()
                     ? offset_wall(t.centerline, t.half_width, closed, -1.0)
                     : std::move(right_wall);

  check_wall_clearance(t, t.left_wall, "left wall", opts.min_wall_clearance);
  check_wall_clearance(t, t.right_wall, "right wall", opts.min_wall_clearance);
  check_wall_self_intersection(t.left_wall, closed, "left wall");
  check_wall_self_intersection(t.right_wall, closed, "right wall");

  append_wall_segments(t, t.left_wall);
  append_wall_segments(t, t.right_wall);
  t.content_hash = hash_geometry(t);
  return t;
}

TrackDefinition load_track(const std::string& path,
                           const TrackLoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open track file: " + path);

  auto fail = [&path](int line, const std::string& what) {
    std::ostringstream msg;
    msg << path << ":" << line << ": " << what;
    throw ConfigError(msg.str());
  };

  std::vector<Vec2> centerline;
  std::vector<double> half_width;
  std::vector<Vec2> left_wall;
  std::vector<Vec2> right_wall;
  bool closed = false;
  bool saw_header = false;
  enum class Section { Body, LeftWall, RightWall };
  Section section = Section::Body;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    if (!saw_header) {
      std::istringstream ss(line);
      std::string magic, closed_kv;
      ss >> magic >> closed_kv;
      if (magic != "track-v1" ||
          (closed_kv != "closed=0" && closed_kv != "closed=1")) {
        fail(line_no, "expected header `track-v1 closed=<0|1>`, got `" + line + "`");
      }
      closed = closed_kv == "closed=1";
      saw_header = true;
      continue;
    }

    if (line.front() == '[') {
      if (line == "[left_wall]") {
        section = Section::LeftWall;
      } else if (line == "[right_wall]") {
        section = Section::RightWall;
      } else {
        fail(line_no, "unknown section `" + line + "`");
      }
      continue;
    }

    std::istringstream ss(line);
    double x, y, w;
    if (section == Section::Body) {
      if (!(ss >> x >> y >> w) || !(ss >> std::ws).eof()) {
        fail(line_no, "expected `x y half_width`, got `" + line + "`");
      }
      centerline.push_back({x, y});
      half_width.push_back(w);
    } else {
      if (!(ss >> x >> y) || !(ss >> std::ws).eof()) {
        fail(line_no, "expected `x y`, got `" + line + "`");
      }
      (section == Section::LeftWall ? left_wall : right_wall).push_back({x, y});
    }
  }

  if (!saw_header) fail(line_no, "missing `track-v1` header");
  if (centerline.size() < 16) {
    std::ostringstream msg;
    msg << path << ": track files need at least 16 centerline samples, got "
        << centerline.size();
    throw ConfigError(msg.str());
  }
  try {
    return build_track(std::move(centerline), std::move(half_width), closed,
                       std::move(left_wall), std::move(right_wall), opts);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::optional<CenterlineProjection> project_global(const TrackDefinition& track,
                                                   Vec2 position,
                                                   double max_distance) {
  Candidate best = scan_all(track, position);
  if (best.idx < 0 || best.dist_sq > max_distance * max_distance) {
    return std::nullopt;
  }
  return make_projection(track, position, best);
}

std::optional<CenterlineProjection> project(const TrackDefinition& track,
                                            Vec2 position, double hint,
                                            double window,
                                            double max_distance) {
  int n_seg = track.num_segments();
  Candidate best;
  if (track.closed && 2.0 * window >= track.total_length) {
    best = scan_all(track, position);
  } else {
    double lo_s = wrap_progress(track, hint - window);
    double hi_s = wrap_progress(track, hint + window);
    int lo = segment_of(track, lo_s);
    int hi = segment_of(track, hi_s);
    // Scan candidates in ascending segment order so exact-tie handling
    // matches the global reference.
    if (lo <= hi) {
      for (int i = lo; i <= hi; ++i) consider_segment(track, position, i, best);
    } else {
      for (int i = 0; i <= hi; ++i) consider_segment(track, position, i, best);
      for (int i = lo; i < n_seg; ++i) consider_segment(track, position, i, best);
    }
  }
  if (best.idx < 0 || best.dist_sq > max_distance * max_distance) {
    return project_global(track, position, max_distance);
  }
  return make_projection(track, position, best);
}

double tangent_at(const TrackDefinition& track, double progress) {
  double s = wrap_progress(track, progress);
  int i = segment_of(track, s);
  Vec2 d = track.segment_end(i) - track.segment_start(i);
  return std::atan2(d.y, d.x);
}

Vec2 position_at(const TrackDefinition& track, double progress) {
  double s = wrap_progress(track, progress);
  int i = segment_of(track, s);
  double len = track.segment_length(i);
  double t = len > 0.0 ? (s - track.arclength[i]) / len : 0.0;
  Vec2 a = track.segment_start(i);
  return a + (track.segment_end(i) - a) * t;
}

double curvature_at(const TrackDefinition& track, double progress) {
  double s = wrap_progress(track, progress);
  if (!track.closed && s >= track.arclength.back()) {
    return track.point_curvature.back();
  }
  int i = segment_of(track, s);
  double len = track.segment_length(i);
  double t = len > 0.0 ? (s - track.arclength[i]) / len : 0.0;
  double k0 = track.point_curvature[i];
  double k1 = track.point_curvature[(i + 1) % track.num_points()];
  return k0 + (k1 - k0) * t;
}

std::vector<double> raycast(const TrackDefinition& track, Vec2 origin,
                            double heading,
                            const std::vector<double>& relative_angles,
                            double max_range) {
  std::vector<double> out(relative_angles.size(), max_range);
  for (size_t k = 0; k < relative_angles.size(); ++k) {
    double a = heading + relative_angles[k];
    Vec2 dir{std::cos(a), std::sin(a)};
    double best = max_range;
    for (const auto& seg : track.wall_segments) {
      double d = ray_segment_distance(origin, dir, seg.a, seg.b);
      if (d >= 0.0 && d < best) best = d;
    }
    out[k] = best;
  }
  return out;
}

std::optional<WallContact> wall_contact(const TrackDefinition& track,
                                        const std::vector<Vec2>& footprint) {
  if (footprint.empty()) return std::nullopt;
  Vec2 centroid{0.0, 0.0};
  for (Vec2 v : footprint) centroid += v;
  centroid = centroid * (1.0 / static_cast<double>(footprint.size()));
  Candidate near = scan_all(track, centroid);
  double center_progress = wrap_progress(
      track, track.segment_arclength(near.idx) +
                 near.t * track.segment_length(near.idx));

  bool found = false;
  WallContact best{};
  double best_pen = -1.0;
  for (const auto& seg : track.wall_segments) {
    // Only walls bounding the local stretch of corridor can be in contact;
    // distant stretches of the lap may pass nearby in space.
    if (progress_distance(track, seg.anchor_progress, center_progress) >
        kContactWindow) {
      continue;
    }
    Vec2 span = seg.b - seg.a;
    double len_sq = norm_sq(span);
    double slack_u = kContactSlack / std::sqrt(len_sq);
    double pen_cap =
        std::max(3.0, 2.0 * track.half_width_at(seg.anchor_progress));
    for (Vec2 v : footprint) {
      double depth = -dot(v - seg.a, seg.inward);
      if (depth < 0.0 || depth > pen_cap) continue;
      double u = dot(v - seg.a, span) / len_sq;
      if (u < -slack_u || u > 1.0 + slack_u) continue;
      if (depth > best_pen) {
        best_pen = depth;
        best = {seg.inward, depth, v};
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace apex
