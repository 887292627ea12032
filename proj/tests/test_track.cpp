#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "apex/error.hpp"
#include "apex/rng.hpp"
#include "apex/track.hpp"

using namespace apex;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fixture(const char* name) {
  return std::string(APEX_SOURCE_DIR "/tracks/") + name;
}

std::vector<Vec2> circle_points(double radius, int n) {
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * kPi * i / n;
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return pts;
}

TrackDefinition circle_track(double radius = 50.0, int n = 128,
                             double hw = 4.0) {
  return build_track(circle_points(radius, n),
                     std::vector<double>(n, hw), /*closed=*/true);
}

}  // namespace

TEST_CASE("circle curvature equals 1/R at every sample") {
  // Oracle: the circumcircle through three points of a circle of radius R
  // is that circle, so the sampled curvature is exactly 1/R regardless of
  // polygonization density.
  for (double radius : {50.0, 15.0, 200.0}) {
    TrackDefinition t = circle_track(radius, 96);
    for (double kappa : t.point_curvature) {
      CHECK(std::abs(kappa - 1.0 / radius) < 1e-6);
    }
  }
}

TEST_CASE("clockwise circle flips the curvature sign") {
  auto pts = circle_points(30.0, 64);
  std::reverse(pts.begin() + 1, pts.end());  // keep start, reverse direction
  TrackDefinition t =
      build_track(pts, std::vector<double>(64, 4.0), /*closed=*/true);
  for (double kappa : t.point_curvature) {
    CHECK(std::abs(kappa + 1.0 / 30.0) < 1e-6);
  }
}

TEST_CASE("circum_curvature handles collinear and coincident input") {
  CHECK(circum_curvature({0, 0}, {1, 0}, {2, 0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(circum_curvature({0, 0}, {0, 0}, {1, 1}),
                  std::invalid_argument);
  // unit circle through three known points
  CHECK(circum_curvature({1, 0}, {0, 1}, {-1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("arclength table is cumulative segment lengths") {
  TrackDefinition t = circle_track(50.0, 128);
  CHECK(t.arclength[0] == 0.0);
  double chord = 2.0 * 50.0 * std::sin(kPi / 128.0);
  for (int i = 1; i < t.num_points(); ++i) {
    CHECK(t.arclength[i] == doctest::Approx(i * chord).epsilon(1e-9));
  }
  CHECK(t.total_length == doctest::Approx(128 * chord).epsilon(1e-9));
}

TEST_CASE("windowed projection matches brute force on random queries") {
  TrackDefinition circle = circle_track();
  TrackDefinition oval = load_track(fixture("oval_200.track"));
  Rng rng(2024);
  for (const TrackDefinition* t : {&circle, &oval}) {
    for (int i = 0; i < 1000; ++i) {
      // positions around the corridor, biased inside but straying outside
      double s = rng.uniform(0.0, t->total_length);
      double lateral = rng.uniform(-6.0, 6.0);
      Vec2 base = position_at(*t, s);
      double heading = tangent_at(*t, s);
      Vec2 q = base + rotate({0.0, 1.0}, heading) * lateral;
      double hint = wrap_progress(*t, s + rng.uniform(-20.0, 20.0));

      auto windowed = project(*t, q, hint);
      auto global = project_global(*t, q);
      REQUIRE(windowed.has_value() == global.has_value());
      if (windowed) {
        CHECK(windowed->progress ==
              doctest::Approx(global->progress).epsilon(1e-12));
        CHECK(windowed->lateral_offset ==
              doctest::Approx(global->lateral_offset).epsilon(1e-12));
        CHECK(windowed->tangent_heading ==
              doctest::Approx(global->tangent_heading).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("projection lateral sign is positive left of travel") {
  TrackDefinition t = circle_track();  // counterclockwise
  // a point slightly toward the center is on the left of travel
  Vec2 inward{49.0, 0.0};
  auto p = project_global(t, inward);
  REQUIRE(p);
  CHECK(p->lateral_offset > 0.9);
  auto outward = project_global(t, {51.0, 0.0});
  REQUIRE(outward);
  CHECK(outward->lateral_offset < -0.9);
}

TEST_CASE("projection far from the track returns nullopt") {
  TrackDefinition t = circle_track();
  CHECK(!project_global(t, {1000.0, 1000.0}));
  CHECK(!project(t, {1000.0, 1000.0}, 0.0));
}

TEST_CASE("corridor raycasts match closed-form distances") {
  TrackDefinition t = load_track(fixture("corridor_150.track"));
  REQUIRE(!t.closed);
  // Car mid-corridor pointing +x; walls are y = +-5.
  Vec2 origin{40.0, 0.0};
  double max_range = 100.0;

  // Ray angles measured from the heading; positive rotates left (+y).
  std::vector<double> angles = {kPi / 2.0, -kPi / 2.0, kPi / 4.0, kPi / 6.0,
                                0.0};
  auto d = raycast(t, origin, 0.0, angles, max_range);
  CHECK(std::abs(d[0] - 5.0) < 1e-9);                   // straight left
  CHECK(std::abs(d[1] - 5.0) < 1e-9);                   // straight right
  CHECK(std::abs(d[2] - 5.0 / std::sin(kPi / 4.0)) < 1e-9);
  CHECK(std::abs(d[3] - 5.0 / std::sin(kPi / 6.0)) < 1e-9);
  CHECK(d[4] == doctest::Approx(max_range));            // open end, no hit

  // Offset origin: left wall closer, right wall farther.
  auto d2 = raycast(t, {40.0, 2.0}, 0.0, {kPi / 2.0, -kPi / 2.0}, max_range);
  CHECK(std::abs(d2[0] - 3.0) < 1e-9);
  CHECK(std::abs(d2[1] - 7.0) < 1e-9);

  // Heading rotated: relative angles follow the heading.
  auto d3 = raycast(t, origin, kPi / 2.0, {0.0}, max_range);
  CHECK(std::abs(d3[0] - 5.0) < 1e-9);
}

TEST_CASE("raycast clamps to max range") {
  TrackDefinition t = load_track(fixture("corridor_150.track"));
  auto d = raycast(t, {40.0, 0.0}, 0.0, {kPi / 2.0}, 3.0);
  CHECK(d[0] == doctest::Approx(3.0));
}

TEST_CASE("wall_contact flags footprints straddling a wall") {
  TrackDefinition t = load_track(fixture("corridor_150.track"));
  // fully inside
  std::vector<Vec2> inside = {{40, -1}, {42, -1}, {42, 1}, {40, 1}};
  CHECK(!wall_contact(t, inside));
  // poking through the left wall at y = 5
  std::vector<Vec2> poking = {{40, 4}, {42, 4}, {42, 5.5}, {40, 5.5}};
  auto c = wall_contact(t, poking);
  REQUIRE(c);
  CHECK(c->penetration == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(c->normal.y == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("position, tangent, and curvature agree with the geometry") {
  TrackDefinition t = circle_track(50.0, 256);
  for (double s : {0.0, 10.0, 100.0, 250.0}) {
    Vec2 p = position_at(t, s);
    CHECK(norm(p) == doctest::Approx(50.0).epsilon(1e-3));
    // tangent is perpendicular to the radius for a circle
    double tangent = tangent_at(t, s);
    Vec2 radial = normalized(p);
    Vec2 dir{std::cos(tangent), std::sin(tangent)};
    CHECK(std::abs(dot(radial, dir)) < 0.05);
    CHECK(curvature_at(t, s) == doctest::Approx(1.0 / 50.0).epsilon(1e-6));
  }
}

TEST_CASE("wrap_progress is periodic") {
  TrackDefinition t = circle_track();
  double len = t.total_length;
  CHECK(wrap_progress(t, 0.0) == 0.0);
  CHECK(wrap_progress(t, len) == doctest::Approx(0.0));
  CHECK(wrap_progress(t, len + 5.0) == doctest::Approx(5.0));
  CHECK(wrap_progress(t, -5.0) == doctest::Approx(len - 5.0));
}

TEST_CASE("half_width_at interpolates between samples") {
  int n = 32;
  auto pts = circle_points(50.0, n);
  std::vector<double> hw(n, 4.0);
  hw[1] = 6.0;
  TrackDefinition t = build_track(pts, hw, true);
  double mid = (t.arclength[0] + t.arclength[1]) / 2.0;
  CHECK(t.half_width_at(mid) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("loader rejects malformed files with line-precise errors") {
  auto write_tmp = [](const char* name, const std::string& body) {
    std::string path = std::string("/tmp/") + name;
    std::ofstream out(path);
    out << body;
    return path;
  };

  CHECK_THROWS_WITH_AS(load_track("/nonexistent/file.track"),
                       doctest::Contains("cannot open"), ConfigError);

  std::string bad_header = write_tmp("bad_header.track", "not-a-track\n");
  CHECK_THROWS_WITH_AS(load_track(bad_header), doctest::Contains(":1:"),
                       ConfigError);

  std::string bad_row =
      write_tmp("bad_row.track", "track-v1 closed=1\n1 2 3\n4 5\n");
  CHECK_THROWS_WITH_AS(load_track(bad_row), doctest::Contains(":3:"),
                       ConfigError);

  std::string too_few = write_tmp(
      "too_few.track", "track-v1 closed=1\n0 0 4\n10 0 4\n10 10 4\n");
  CHECK_THROWS_WITH_AS(load_track(too_few),
                       doctest::Contains("at least 16"), ConfigError);
}

TEST_CASE("build_track rejects turns sharper than the angle limit") {
  // A zig-zag with ~90 degree turns on an otherwise long path.
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({i * 10.0, 0.0});
  pts[10] = {100.0, 9.0};  // sharp kink
  CHECK_THROWS_WITH_AS(
      build_track(pts, std::vector<double>(pts.size(), 4.0), false),
      doctest::Contains("turn"), ConfigError);
}

TEST_CASE("build_track rejects walls closer than the clearance") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({i * 10.0, 0.0});
  std::vector<double> hw(pts.size(), 4.0);
  // explicit left wall dipping to 0.2 m from the centerline
  std::vector<Vec2> left;
  for (int i = 0; i < 20; ++i) {
    left.push_back({i * 10.0, i == 10 ? 0.2 : 4.0});
  }
  CHECK_THROWS_WITH_AS(build_track(pts, hw, false, left, {}),
                       doctest::Contains("clearance"), ConfigError);
}

TEST_CASE("shipped fixtures load and report sane lengths") {
  TrackDefinition circle = load_track(fixture("circle_r50.track"));
  CHECK(circle.closed);
  CHECK(circle.total_length == doctest::Approx(314.128).epsilon(1e-3));

  TrackDefinition oval = load_track(fixture("oval_200.track"));
  CHECK(oval.closed);
  CHECK(oval.total_length == doctest::Approx(199.93).epsilon(1e-2));

  TrackDefinition hairpin = load_track(fixture("hairpin_320.track"));
  CHECK(hairpin.closed);

  TrackDefinition corridor = load_track(fixture("corridor_150.track"));
  CHECK(!corridor.closed);
  CHECK(corridor.total_length == doctest::Approx(150.0));
}

TEST_CASE("content hash distinguishes geometries and is stable") {
  TrackDefinition a = circle_track();
  TrackDefinition b = circle_track();
  TrackDefinition c = circle_track(49.0);
  CHECK(a.content_hash == b.content_hash);
  CHECK(a.content_hash != c.content_hash);
}
