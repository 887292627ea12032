#include "apex/car.hpp"

#include <algorithm>
#include <cmath>

#include "apex/error.hpp"

namespace apex {
namespace {

constexpr double kGravity = 9.81;
// Slip angle at which a linear tire reaches its friction-circle limit.
constexpr double kSlipSaturation = 0.12;
// Floor on the slip-angle denominator, and the speed below which lateral
// tire force tapers to zero — both keep the model sane near standstill.
constexpr double kSlipDenomMin = 0.3;
constexpr double kLateralTaperSpeed = 1.0;
// Inbound normal speed separating an impact from sliding contact.
constexpr double kImpactSpeed = 0.1;

double clamp_mag(double v, double limit) {
  return std::clamp(v, -limit, limit);
}

}  // namespace

CarConfig CarConfig::slow() { return CarConfig{}; }

CarConfig CarConfig::fast() {
  CarConfig c;
  c.mass = 1150.0;
  c.yaw_inertia = 1600.0;
  c.lf = 1.22;
  c.lr = 1.28;
  c.friction = 1.35;
  c.max_engine_force = 7800.0;
  c.max_brake_force = 16000.0;
  c.drag_coeff = 1.50;
  c.rolling_coeff = 10.0;
  c.length = 4.18;
  c.width = 1.83;
  c.restitution = 0.5;
  return c;
}

std::vector<Vec2> car_footprint(const CarState& state,
                                const CarConfig& config) {
  double hl = 0.5 * config.length;
  double hw = 0.5 * config.width;
  std::vector<Vec2> corners{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}};
  for (Vec2& c : corners) {
    c = state.position + rotate(c, state.heading);
  }
  return corners;
}

CarState step(const CarState& state, const Action& action,
              const CarConfig& config, const TrackDefinition& track,
              double dt) {
  double steer = clamp_mag(action.steer, config.max_steer);
  double w = clamp_mag(action.throttle, 1.0);

  double fz_front = config.mass * kGravity * config.lr / config.wheelbase();
  double fz_rear = config.mass * kGravity * config.lf / config.wheelbase();

  // Linear tire stiffness proportional to axle load makes the model
  // neutral-steering: the steady-state radius matches the kinematic
  // wheelbase/tan(steer) independent of speed until the friction circle
  // saturates.
  double stiff_front = config.friction * fz_front / kSlipSaturation;
  double stiff_rear = config.friction * fz_rear / kSlipSaturation;

  double denom = std::max(std::abs(state.vx), kSlipDenomMin);
  double slip_front =
      std::atan2(state.vy + config.lf * state.yaw_rate, denom) - steer;
  double slip_rear = std::atan2(state.vy - config.lr * state.yaw_rate, denom);
  double taper = std::clamp(state.speed() / kLateralTaperSpeed, 0.0, 1.0);
  double fy_front = -stiff_front * slip_front * taper;
  double fy_rear = -stiff_rear * slip_rear * taper;

  double fx_cmd;
  if (w > 0.0) {
    fx_cmd = w * config.max_engine_force;
  } else {
    // Braking opposes the current direction of motion and fades out at
    // standstill so a braking car comes to rest instead of oscillating.
    double dir = std::clamp(state.vx / kSlipDenomMin, -1.0, 1.0);
    fx_cmd = w * config.max_brake_force * dir;
  }
  double fx_front = fx_cmd * fz_front / (config.mass * kGravity);
  double fx_rear = fx_cmd * fz_rear / (config.mass * kGravity);

  auto friction_circle = [](double& fx, double& fy, double limit) {
    double mag = std::hypot(fx, fy);
    if (mag > limit && mag > 0.0) {
      double s = limit / mag;
      fx *= s;
      fy *= s;
    }
  };
  friction_circle(fx_front, fy_front, config.friction * fz_front);
  friction_circle(fx_rear, fy_rear, config.friction * fz_rear);

  double speed = state.speed();
  double drag_x = -(config.drag_coeff * speed + config.rolling_coeff) * state.vx;
  double drag_y = -(config.drag_coeff * speed + config.rolling_coeff) * state.vy;

  double cos_s = std::cos(steer), sin_s = std::sin(steer);
  double force_x = fx_front * cos_s - fy_front * sin_s + fx_rear + drag_x;
  double force_y = fx_front * sin_s + fy_front * cos_s + fy_rear + drag_y;
  double torque = config.lf * (fy_front * cos_s + fx_front * sin_s) -
                  config.lr * fy_rear;

  CarState next = state;
  double dvx = (force_x / config.mass + state.vy * state.yaw_rate) * dt;
  double dvy = (force_y / config.mass - state.vx * state.yaw_rate) * dt;
  next.vx = state.vx + dvx;
  next.vy = state.vy + dvy;
  next.yaw_rate = state.yaw_rate + (torque / config.yaw_inertia) * dt;
  next.heading = wrap_angle(state.heading + next.yaw_rate * dt);
  next.position = state.position + rotate({next.vx, next.vy}, next.heading) * dt;
  next.last_steering = steer;
  next.wall_contact = false;

  if (auto contact = wall_contact(track, car_footprint(next, config))) {
    next.wall_contact = true;
    next.position += contact->normal * contact->penetration;
    Vec2 v_world = next.world_velocity();
    double along_normal = dot(v_world, contact->normal);
    if (along_normal < 0.0) {  // moving into the wall
      Vec2 tangential = v_world - contact->normal * along_normal;
      if (-along_normal > kImpactSpeed) {
        double target_speed =
            std::sqrt(config.restitution) * norm(v_world);
        double tan_speed = norm(tangential);
        v_world = tan_speed > 1e-9
                      ? tangential * (target_speed / tan_speed)
                      : Vec2{0.0, 0.0};
      } else {
        v_world = tangential;
      }
      Vec2 v_body = rotate(v_world, -next.heading);
      next.vx = v_body.x;
      next.vy = v_body.y;
    }
  }

  next.ax = (next.vx - state.vx) / dt;
  next.ay = (next.vy - state.vy) / dt;

  bool finite = std::isfinite(next.position.x) && std::isfinite(next.position.y) &&
                std::isfinite(next.heading) && std::isfinite(next.vx) &&
                std::isfinite(next.vy) && std::isfinite(next.yaw_rate);
  if (!finite) {
    throw SimulationFault("car state became non-finite");
  }
  return next;
}

}  // namespace apex
