#pragma once

#include <array>
#include <cmath>

namespace apex {

struct RewardConfig {
  double wall_penalty_scale = 5e-4;  // c_w, (m/s)^-2
  double gamma = 0.98;               // exponential discount
};

// Wrap-aware course progress gained between two samples: the representative
// of (cp_now - cp_prev) mod total_length lying in (-total_length/2,
// total_length/2]. Preserves telescoping across the lap seam and penalizes
// driving backwards.
inline double progress_reward(double cp_now, double cp_prev,
                              double total_length) {
  double d = std::fmod(cp_now - cp_prev, total_length);
  if (d <= -0.5 * total_length) d += total_length;
  if (d > 0.5 * total_length) d -= total_length;
  return d;
}

// Progress reward minus the kinetic-energy wall penalty: r_prog minus
// c_w * |v|^2 while in contact with a wall, r_prog otherwise.
inline double total_reward(double r_prog, const std::array<double, 3>& v,
                           bool in_wall_contact, const RewardConfig& config) {
  if (!in_wall_contact) return r_prog;
  double speed_sq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  return r_prog - config.wall_penalty_scale * speed_sq;
}

}  // namespace apex
