#include "apex/observation.hpp"

#include <cmath>

#include "apex/error.hpp"

namespace apex {

Observation build_observation(const CarState& state,
                              const TrackDefinition& track,
                              const CenterlineProjection& projection,
                              const ObsConfig& config) {
  Observation obs;
  obs.v = {state.vx, state.vy, 0.0};
  obs.v_dot = {state.ax, state.ay, 0.0};
  obs.theta = wrap_angle(state.heading - projection.tangent_heading);

  int m = config.num_rangefinders;
  std::vector<double> angles(m, 0.0);
  for (int i = 0; i < m; ++i) {
    angles[i] = m > 1 ? -std::numbers::pi / 2.0 +
                            std::numbers::pi * i / (m - 1)
                      : 0.0;
  }
  obs.rangefinders =
      raycast(track, state.position, state.heading, angles, config.max_range);

  obs.prev_steering = state.last_steering;
  obs.wall_flag = state.wall_contact ? 1.0 : 0.0;

  int n = config.num_curvatures;
  obs.curvatures.resize(n);
  double speed = state.speed();
  for (int k = 0; k < n; ++k) {
    double t = n > 1 ? config.lookahead_start +
                           (config.lookahead_end - config.lookahead_start) *
                               k / (n - 1)
                     : config.lookahead_start;
    double s = wrap_progress(track, projection.progress + speed * t);
    obs.curvatures[k] = curvature_at(track, s);
  }
  return obs;
}

std::vector<double> normalize(const Observation& obs,
                              const NormScales& scales) {
  std::vector<double> out;
  out.reserve(obs.dim());
  for (double x : obs.v) out.push_back(x / scales.speed);
  for (double x : obs.v_dot) out.push_back(x / scales.accel);
  out.push_back(obs.theta / scales.angle);
  for (double x : obs.rangefinders) out.push_back(x / scales.range);
  out.push_back(obs.prev_steering / scales.angle);
  out.push_back(obs.wall_flag);
  for (double x : obs.curvatures) out.push_back(x / scales.curvature);
  for (double x : out) {
    if (!std::isfinite(x)) {
      throw SimulationFault("non-finite observation");
    }
  }
  return out;
}

Observation denormalize(const std::vector<double>& flat,
                        const ObsConfig& config, const NormScales& scales) {
  if (static_cast<int>(flat.size()) != config.dim()) {
    throw SimulationFault("observation vector has wrong dimension");
  }
  Observation obs;
  size_t i = 0;
  for (double& x : obs.v) x = flat[i++] * scales.speed;
  for (double& x : obs.v_dot) x = flat[i++] * scales.accel;
  obs.theta = flat[i++] * scales.angle;
  obs.rangefinders.resize(config.num_rangefinders);
  for (double& x : obs.rangefinders) x = flat[i++] * scales.range;
  obs.prev_steering = flat[i++] * scales.angle;
  obs.wall_flag = flat[i++];
  obs.curvatures.resize(config.num_curvatures);
  for (double& x : obs.curvatures) x = flat[i++] * scales.curvature;
  return obs;
}

}  // namespace apex
