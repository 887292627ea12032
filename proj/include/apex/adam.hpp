#pragma once

#include <cstdint>
#include <vector>

#include "apex/mlp.hpp"

namespace apex {

// Bias-corrected adaptive moment optimizer over one network's parameters.
// Moment blocks mirror the parameter layout: [w0, b0, w1, b1, ...].
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const MlpParams& params);

  // One update. Throws TrainingFault if any gradient is non-finite.
  void step(MlpParams& params, const MlpGrads& grads);
};

}  // namespace apex
