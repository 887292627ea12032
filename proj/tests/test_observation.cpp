#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "apex/error.hpp"
#include "apex/observation.hpp"
#include "apex/rng.hpp"
#include "apex/track.hpp"

using namespace apex;

namespace {

constexpr double kPi = std::numbers::pi;

TrackDefinition corridor() {
  return load_track(APEX_SOURCE_DIR "/tracks/corridor_150.track");
}

TrackDefinition circle() {
  return load_track(APEX_SOURCE_DIR "/tracks/circle_r50.track");
}

CenterlineProjection must_project(const TrackDefinition& t, Vec2 p) {
  auto proj = project_global(t, p);
  REQUIRE(proj);
  return *proj;
}

}  // namespace

TEST_CASE("feature vector has the documented layout and dimension") {
  ObsConfig cfg;
  CHECK(cfg.dim() == 32);  // 3 + 3 + 1 + 13 + 1 + 1 + 10

  TrackDefinition t = corridor();
  CarState s;
  s.position = {40.0, 1.0};
  s.heading = 0.1;
  s.vx = 12.0;
  s.vy = -0.5;
  s.ax = 2.0;
  s.ay = -1.0;
  s.last_steering = 0.05;
  s.wall_contact = true;

  Observation obs = build_observation(s, t, must_project(t, s.position));
  CHECK(obs.dim() == 32);
  CHECK(obs.v[0] == 12.0);
  CHECK(obs.v[1] == -0.5);
  CHECK(obs.v[2] == 0.0);  // planar world: third axis always zero
  CHECK(obs.v_dot[0] == 2.0);
  CHECK(obs.v_dot[1] == -1.0);
  CHECK(obs.v_dot[2] == 0.0);
  CHECK(obs.theta == doctest::Approx(0.1));  // corridor tangent is +x
  CHECK(obs.rangefinders.size() == 13);
  CHECK(obs.prev_steering == 0.05);
  CHECK(obs.wall_flag == 1.0);
  CHECK(obs.curvatures.size() == 10);
  for (double c : obs.curvatures) CHECK(c == doctest::Approx(0.0));
}

TEST_CASE("rangefinder fan spans the front half-plane") {
  // Mid-corridor, heading along +x: ray k has world angle -90..+90 degrees.
  // Side rays hit the walls at 5 / sin(angle); dead-ahead hits the far end.
  TrackDefinition t = corridor();
  CarState s;
  s.position = {75.0, 0.0};
  s.heading = 0.0;
  Observation obs = build_observation(s, t, must_project(t, s.position));
  REQUIRE(obs.rangefinders.size() == 13);

  for (int i = 0; i < 13; ++i) {
    double angle = -kPi / 2.0 + kPi * i / 12.0;
    if (std::abs(std::sin(angle)) < 1e-12) continue;  // the forward ray
    double expected = std::min(100.0, 5.0 / std::abs(std::sin(angle)));
    CHECK(obs.rangefinders[i] == doctest::Approx(expected).epsilon(1e-9));
  }
  // straight ahead: the corridor is open-ended, so the forward ray never
  // meets a wall and runs out at the clamp distance
  CHECK(obs.rangefinders[6] == doctest::Approx(100.0));

  // symmetry: the fan is mirror-symmetric about the heading here
  for (int i = 0; i < 6; ++i) {
    CHECK(obs.rangefinders[i] ==
          doctest::Approx(obs.rangefinders[12 - i]).epsilon(1e-9));
  }
}

TEST_CASE("heading angle is measured against the local tangent") {
  TrackDefinition t = circle();
  // On the CCW circle at angle 0 the centerline tangent points +y.
  CarState s;
  s.position = {50.0, 0.0};
  s.heading = kPi / 2.0;
  Observation obs = build_observation(s, t, must_project(t, s.position));
  // the 128-gon chord tangent is pi/128 off the true circle tangent
  CHECK(std::abs(obs.theta) < 0.03);

  s.heading = kPi;  // now pointing 90 degrees left of the tangent
  obs = build_observation(s, t, must_project(t, s.position));
  CHECK(obs.theta == doctest::Approx(kPi / 2.0).epsilon(0.02));
}

TEST_CASE("curvature look-ahead samples scale with speed and wrap the seam") {
  TrackDefinition t = circle();
  CarState s;
  s.position = {50.0, 0.0};
  s.heading = kPi / 2.0;
  s.vx = 10.0;
  auto proj = must_project(t, s.position);
  Observation obs = build_observation(s, t, proj);
  // every sample of a circle has the same curvature
  for (double c : obs.curvatures) {
    CHECK(c == doctest::Approx(1.0 / 50.0).epsilon(1e-6));
  }

  // place the car near the seam so look-ahead must wrap; oracle recomputes
  // the sample points by hand
  auto near_end = must_project(t, position_at(t, t.total_length - 1.0));
  CarState fast_car;
  fast_car.position = position_at(t, t.total_length - 1.0);
  fast_car.vx = 20.0;
  ObsConfig cfg;
  Observation wrapped = build_observation(fast_car, t, near_end, cfg);
  for (int k = 0; k < cfg.num_curvatures; ++k) {
    double tk = cfg.lookahead_start +
                (cfg.lookahead_end - cfg.lookahead_start) * k /
                    (cfg.num_curvatures - 1);
    double sk = std::fmod(near_end.progress + 20.0 * tk, t.total_length);
    CHECK(wrapped.curvatures[k] ==
          doctest::Approx(curvature_at(t, sk)).epsilon(1e-12));
  }
}

TEST_CASE("curvature look-ahead is signed by turn direction") {
  // Clockwise circle: car drives it with the wall curving right.
  int n = 64;
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    double a = -2.0 * kPi * i / n;
    pts.push_back({30.0 * std::cos(a), 30.0 * std::sin(a)});
  }
  TrackDefinition cw = build_track(pts, std::vector<double>(n, 6.0), true);
  CarState s;
  s.position = {30.0, 0.0};
  s.vx = 5.0;
  Observation obs = build_observation(s, cw, must_project(cw, s.position));
  for (double c : obs.curvatures) CHECK(c < 0.0);

  TrackDefinition ccw = circle();
  s.position = {50.0, 0.0};
  obs = build_observation(s, ccw, must_project(ccw, s.position));
  for (double c : obs.curvatures) CHECK(c > 0.0);
}

TEST_CASE("normalize flattens in field order with fixed scales") {
  Observation obs;
  obs.v = {10.0, -2.0, 0.0};
  obs.v_dot = {4.0, 1.0, 0.0};
  obs.theta = kPi / 4.0;
  obs.rangefinders = {50.0, 25.0};
  obs.prev_steering = -kPi / 6.0;
  obs.wall_flag = 1.0;
  obs.curvatures = {0.05, -0.02};

  std::vector<double> flat = normalize(obs);
  REQUIRE(flat.size() == 13);
  CHECK(flat[0] == doctest::Approx(0.10));
  CHECK(flat[1] == doctest::Approx(-0.02));
  CHECK(flat[2] == 0.0);
  CHECK(flat[3] == doctest::Approx(0.20));
  CHECK(flat[4] == doctest::Approx(0.05));
  CHECK(flat[5] == 0.0);
  CHECK(flat[6] == doctest::Approx(0.25));
  CHECK(flat[7] == doctest::Approx(0.50));
  CHECK(flat[8] == doctest::Approx(0.25));
  CHECK(flat[9] == doctest::Approx(-1.0 / 6.0));
  CHECK(flat[10] == 1.0);
  CHECK(flat[11] == doctest::Approx(0.50));
  CHECK(flat[12] == doctest::Approx(-0.20));
}

TEST_CASE("denormalize is the exact inverse of normalize") {
  TrackDefinition t = circle();
  Rng rng(7);
  ObsConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    CarState s;
    s.position = position_at(t, rng.uniform(0.0, t.total_length));
    s.heading = rng.uniform(-kPi, kPi);
    s.vx = rng.uniform(0.0, 40.0);
    s.vy = rng.uniform(-3.0, 3.0);
    s.ax = rng.uniform(-10.0, 10.0);
    s.ay = rng.uniform(-10.0, 10.0);
    s.last_steering = rng.uniform(-0.5, 0.5);
    s.wall_contact = rng.uniform() < 0.5;

    Observation obs = build_observation(s, t, must_project(t, s.position));
    std::vector<double> flat = normalize(obs);
    Observation back = denormalize(flat, cfg);
    std::vector<double> flat2 = normalize(back);
    REQUIRE(flat.size() == flat2.size());
    for (size_t i = 0; i < flat.size(); ++i) {
      // one rounding step each way: agree to within an ulp
      CHECK(flat2[i] == doctest::Approx(flat[i]).epsilon(1e-15));
    }
    CHECK(back.theta == doctest::Approx(obs.theta).epsilon(1e-15));
    CHECK(back.wall_flag == obs.wall_flag);  // 1.0 scale: bit-exact
  }
}

TEST_CASE("normalize rejects non-finite features") {
  Observation obs;
  obs.rangefinders = {1.0};
  obs.curvatures = {0.0};
  obs.theta = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(normalize(obs), SimulationFault);
  obs.theta = 0.0;
  obs.v[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(normalize(obs), SimulationFault);
}

TEST_CASE("denormalize rejects a wrong-size vector") {
  ObsConfig cfg;
  std::vector<double> flat(cfg.dim() - 1, 0.0);
  CHECK_THROWS_AS(denormalize(flat, cfg), SimulationFault);
}

TEST_CASE("configurable sensor counts change the dimension") {
  ObsConfig cfg;
  cfg.num_rangefinders = 5;
  cfg.num_curvatures = 3;
  CHECK(cfg.dim() == 17);

  TrackDefinition t = circle();
  CarState s;
  s.position = {50.0, 0.0};
  s.vx = 5.0;
  Observation obs = build_observation(s, t, must_project(t, s.position), cfg);
  CHECK(obs.dim() == 17);
  CHECK(normalize(obs).size() == 17);
}
