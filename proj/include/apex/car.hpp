#pragma once

#include <numbers>
#include <vector>

#include "apex/geom.hpp"
#include "apex/track.hpp"

namespace apex {

// Agent command: front steering angle (rad) and a combined throttle/brake
// scalar where w > 0 is throttle and w <= 0 is braking.
struct Action {
  double steer = 0.0;
  double throttle = 0.0;
};

struct CarConfig {
  double mass = 1100.0;          // kg
  double yaw_inertia = 1500.0;   // kg m^2
  double lf = 1.25;              // CG to front axle, m
  double lr = 1.32;              // CG to rear axle, m
  double friction = 0.95;        // tire-road friction coefficient
  double max_engine_force = 4200.0;   // N
  double max_brake_force = 9000.0;    // N
  double drag_coeff = 1.35;      // N s^2 / m^2
  double rolling_coeff = 12.0;   // N s / m
  double length = 4.06;          // footprint, m
  double width = 1.70;           // footprint, m
  double max_steer = std::numbers::pi / 6.0;  // rad
  double restitution = 0.5;      // kinetic-energy retention on wall impact

  double wheelbase() const { return lf + lr; }

  // Low-grip commuter archetype.
  static CarConfig slow();
  // High-grip, high-power race archetype.
  static CarConfig fast();
};

struct CarState {
  Vec2 position;              // world frame, m
  double heading = 0.0;       // rad, wrapped to (-pi, pi]
  double vx = 0.0;            // body-frame forward velocity, m/s
  double vy = 0.0;            // body-frame lateral velocity (left +), m/s
  double yaw_rate = 0.0;      // rad/s
  double ax = 0.0;            // body-frame acceleration (one-tick finite
  double ay = 0.0;            //   difference of vx, vy), m/s^2
  double last_steering = 0.0; // steering applied on the most recent tick
  bool wall_contact = false;  // true if the most recent tick touched a wall

  double speed() const { return std::hypot(vx, vy); }
  Vec2 world_velocity() const { return rotate({vx, vy}, heading); }
};

// Footprint rectangle (4 corners, counterclockwise) centered on the CG.
std::vector<Vec2> car_footprint(const CarState& state, const CarConfig& config);

// Advances the car by one fixed physics tick: dynamic bicycle model with
// per-axle linear-in-slip tire forces saturated by the friction circle,
// semi-implicit Euler integration, then wall contact resolution (position
// de-penetrated, inbound velocity removed; impacts additionally scale the
// remaining speed so kinetic energy drops to restitution x its prior value,
// while low-normal-speed sliding keeps its tangential speed so grinding
// along a wall stays representable). Throws SimulationFault if the
// resulting state is not finite.
CarState step(const CarState& state, const Action& action,
              const CarConfig& config, const TrackDefinition& track,
              double dt);

}  // namespace apex
