#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "apex/car.hpp"
#include "apex/error.hpp"
#include "apex/rng.hpp"
#include "apex/track.hpp"

using namespace apex;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDt = 1.0 / 60.0;
constexpr double kGravity = 9.81;

// Wide-open arena: a huge circle so the walls never matter.
TrackDefinition arena() {
  int n = 128;
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * kPi * i / n;
    pts.push_back({200.0 * std::cos(a), 200.0 * std::sin(a)});
  }
  return build_track(pts, std::vector<double>(n, 30.0), true);
}

TrackDefinition corridor() {
  return load_track(APEX_SOURCE_DIR "/tracks/corridor_150.track");
}

}  // namespace

TEST_CASE("one straight-line tick matches Newton by hand") {
  TrackDefinition t = arena();
  CarConfig car;  // slow archetype defaults
  CarState s;
  s.position = {200.0 - 30.0 + 15.0, 0.0};  // mid-corridor of the arena ring
  s.position = position_at(t, 0.0);
  s.heading = tangent_at(t, 0.0);
  s.vx = 10.0;

  CarState next = step(s, {0.0, 1.0}, car, t, kDt);

  // No slip (vy = 0, yaw_rate = 0, steer = 0): longitudinal force is engine
  // minus drag; the friction circle is far from saturated at these numbers.
  double drag = (car.drag_coeff * 10.0 + car.rolling_coeff) * 10.0;
  double expect_dvx = (car.max_engine_force - drag) / car.mass * kDt;
  CHECK(next.vx == doctest::Approx(10.0 + expect_dvx).epsilon(1e-9));
  CHECK(next.vy == doctest::Approx(0.0));
  CHECK(next.yaw_rate == doctest::Approx(0.0));
  CHECK(next.ax == doctest::Approx(expect_dvx / kDt).epsilon(1e-9));
  CHECK(!next.wall_contact);
}

TEST_CASE("steady-state cornering radius matches wheelbase/tan(steer)") {
  TrackDefinition t = arena();
  CarConfig car;
  // Steer for a 200 m kinematic radius: the car then orbits concentric with
  // the arena ring and stays far from both walls while the yaw settles.
  double steer = std::atan(car.wheelbase() / 200.0);
  CarState s;
  s.position = position_at(t, 0.0);
  s.heading = tangent_at(t, 0.0);
  s.vx = 8.0;

  // Hold ~8 m/s with a proportional throttle while the yaw rate settles.
  for (int i = 0; i < 900; ++i) {
    double w = std::clamp(0.5 * (8.0 - s.vx), -1.0, 1.0);
    s = step(s, {steer, w}, car, t, kDt);
    REQUIRE(!s.wall_contact);
  }
  double radius_measured = s.speed() / std::abs(s.yaw_rate);
  double radius_kinematic = car.wheelbase() / std::tan(steer);
  CHECK(std::abs(radius_measured - radius_kinematic) / radius_kinematic <
        0.02);
}

TEST_CASE("tire forces never exceed the friction circle") {
  TrackDefinition t = arena();
  CarConfig car;
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    CarState s;
    s.position = position_at(t, rng.uniform(0.0, t.total_length));
    s.heading = rng.uniform(-kPi, kPi);
    s.vx = rng.uniform(0.0, 30.0);
    s.vy = rng.uniform(-5.0, 5.0);
    s.yaw_rate = rng.uniform(-2.0, 2.0);
    Action a{rng.uniform(-car.max_steer, car.max_steer),
             rng.uniform(-1.0, 1.0)};
    CarState next = step(s, a, car, t, kDt);
    if (next.wall_contact) continue;  // collision rewrites velocities

    // Reconstruct the body-frame force from the integrator update, then
    // subtract drag: what remains came from the tires and must respect the
    // combined friction limit of both axles.
    double force_x = car.mass * ((next.vx - s.vx) / kDt - s.vy * s.yaw_rate);
    double force_y = car.mass * ((next.vy - s.vy) / kDt + s.vx * s.yaw_rate);
    double speed = s.speed();
    double drag_x = -(car.drag_coeff * speed + car.rolling_coeff) * s.vx;
    double drag_y = -(car.drag_coeff * speed + car.rolling_coeff) * s.vy;
    double tire = std::hypot(force_x - drag_x, force_y - drag_y);
    CHECK(tire <= car.friction * car.mass * kGravity * (1.0 + 1e-9));
  }
}

TEST_CASE("angled impact keeps restitution of the kinetic energy") {
  TrackDefinition t = corridor();
  CarConfig car;
  CarState s;
  // 45 degrees into the left wall (y = +5), close enough to hit this tick.
  s.position = {40.0, 3.8};
  s.heading = kPi / 4.0;
  s.vx = 6.0;

  CarState next = step(s, {0.0, 0.0}, car, t, kDt);
  REQUIRE(next.wall_contact);
  // speed scales to sqrt(restitution) x prior; drag over one tick is tiny
  double expected = std::sqrt(car.restitution) * 6.0;
  CHECK(next.speed() == doctest::Approx(expected).epsilon(0.03));
  // de-penetrated: the footprint no longer crosses the wall meaningfully
  auto contact = wall_contact(t, car_footprint(next, car));
  if (contact) CHECK(contact->penetration < 1e-6);
}

TEST_CASE("perpendicular impact has no tangential direction and stops") {
  TrackDefinition t = corridor();
  CarConfig car;
  CarState s;
  s.position = {40.0, 3.5};
  s.heading = kPi / 2.0;  // straight at the wall
  s.vx = 6.0;
  CarState next = step(s, {0.0, 0.0}, car, t, kDt);
  REQUIRE(next.wall_contact);
  CHECK(next.speed() < 0.2);
}

TEST_CASE("grazing contact slides instead of bouncing") {
  TrackDefinition t = corridor();
  CarConfig car;
  CarState s;
  // Nearly parallel to the left wall, drifting in at 0.05 m/s.
  s.position = {40.0, 5.0 - car.width / 2.0 - 0.0002};
  s.heading = 0.0;
  s.vx = 10.0;
  s.vy = 0.05;

  CarState next = step(s, {0.0, 0.0}, car, t, kDt);
  REQUIRE(next.wall_contact);
  // tangential speed survives: no restitution scaling on a graze
  CHECK(next.vx == doctest::Approx(10.0).epsilon(0.02));
  CHECK(std::abs(next.vy) < 0.01);
}

TEST_CASE("impact versus graze is decided by inbound normal speed") {
  TrackDefinition t = corridor();
  CarConfig car;
  auto hit_wall_speed = [&](double vy_in) {
    CarState s;
    s.position = {40.0, 5.0 - car.width / 2.0 - 0.0002};
    s.heading = 0.0;
    s.vx = 8.0;
    s.vy = vy_in;
    CarState next = step(s, {0.0, 0.0}, car, t, kDt);
    REQUIRE(next.wall_contact);
    return next.speed();
  };
  double graze = hit_wall_speed(0.05);   // below the 0.1 m/s threshold
  double impact = hit_wall_speed(2.0);   // well above
  CHECK(graze > 7.5);                    // kept its tangential speed
  CHECK(impact < 6.5);                   // lost energy to the impact
}

TEST_CASE("braking fades at standstill instead of reversing") {
  TrackDefinition t = arena();
  CarConfig car;
  CarState s;
  s.position = position_at(t, 0.0);
  s.heading = tangent_at(t, 0.0);
  s.vx = 0.5;
  for (int i = 0; i < 120; ++i) {
    s = step(s, {0.0, -1.0}, car, t, kDt);
  }
  CHECK(std::abs(s.vx) < 0.05);
}

TEST_CASE("acceleration fields are the per-tick velocity difference") {
  TrackDefinition t = corridor();
  CarConfig car;
  CarState s;
  s.position = {40.0, 3.5};
  s.heading = kPi / 2.0;
  s.vx = 6.0;
  CarState next = step(s, {0.1, 0.5}, car, t, kDt);
  // holds through collisions too: the finite difference runs last
  CHECK(next.ax == doctest::Approx((next.vx - s.vx) / kDt));
  CHECK(next.ay == doctest::Approx((next.vy - s.vy) / kDt));
}

TEST_CASE("fast archetype out-accelerates and out-grips the slow one") {
  CarConfig slow = CarConfig::slow();
  CarConfig fast = CarConfig::fast();
  CHECK(fast.friction > slow.friction);
  CHECK(fast.max_engine_force > slow.max_engine_force);

  TrackDefinition t = arena();
  auto top_speed = [&](const CarConfig& car) {
    CarState s;
    s.position = position_at(t, 0.0);
    s.heading = tangent_at(t, 0.0);
    s.vx = 1.0;
    double best = 0.0;
    for (int i = 0; i < 600; ++i) {
      // steer along the ring so the arena stays effectively straight
      auto p = project(t, s.position, 0.0, 1e9);
      REQUIRE(p);
      double err = wrap_angle(p->tangent_heading - s.heading);
      s = step(s, {std::clamp(2.0 * err, -0.2, 0.2), 1.0}, car, t, kDt);
      best = std::max(best, s.vx);
    }
    return best;
  };
  CHECK(top_speed(fast) > top_speed(slow) + 5.0);
}

TEST_CASE("footprint is the rotated body rectangle") {
  CarConfig car;
  CarState s;
  s.position = {3.0, 4.0};
  s.heading = kPi / 2.0;
  auto fp = car_footprint(s, car);
  REQUIRE(fp.size() == 4);
  // heading +pi/2 turns the body x axis onto world y
  CHECK(fp[0].x == doctest::Approx(3.0 - car.width / 2.0));
  CHECK(fp[0].y == doctest::Approx(4.0 + car.length / 2.0));
  // area check via the shoelace formula
  double area = 0.0;
  for (size_t i = 0; i < 4; ++i) {
    area += cross(fp[i], fp[(i + 1) % 4]);
  }
  CHECK(std::abs(area) / 2.0 == doctest::Approx(car.length * car.width));
}

TEST_CASE("steering input is clamped to the physical limit") {
  TrackDefinition t = arena();
  CarConfig car;
  CarState s;
  s.position = position_at(t, 0.0);
  s.heading = tangent_at(t, 0.0);
  s.vx = 5.0;
  CarState a = step(s, {10.0, 0.0}, car, t, kDt);
  CarState b = step(s, {car.max_steer, 0.0}, car, t, kDt);
  CHECK(a.vx == b.vx);
  CHECK(a.vy == b.vy);
  CHECK(a.yaw_rate == b.yaw_rate);
  CHECK(a.last_steering == doctest::Approx(car.max_steer));
}
