#pragma once

#include <array>

#include "apex/mlp.hpp"

namespace apex {

// The policy net maps an observation to [mean(2), raw_log_std(2)]. The raw
// log-std is bounded into [kLogStdMin, kLogStdMax] with a tanh so the bound
// stays differentiable for gradient checks.
inline constexpr int kActionDim = 2;
inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

struct PolicyInit {
  double output_scale = 0.01;  // keeps initial actions near zero
  double initial_std = 0.4;    // exploration noise before squashing
};

// Fan-in initialized policy network; the log-std head bias is offset so the
// initial pre-squash standard deviation is `initial_std` instead of the
// near-zero value the bounded parameterization would otherwise start at.
MlpParams policy_init(int obs_dim, const std::vector<int>& hidden, Rng& rng,
                      const PolicyInit& init = {});

struct PolicyOutput {
  std::array<double, kActionDim> mean{};     // pre-squash mean
  std::array<double, kActionDim> log_std{};  // bounded log standard deviation
  std::array<double, kActionDim> action{};   // tanh(mean + std * noise)
  double log_prob = 0.0;  // density of `action` after the tanh change of
                          // variables, with the kSquashEps regularizer
};

// Reparameterized sample for one observation and one standard-normal draw.
PolicyOutput sample_squashed(const MlpParams& policy,
                             const std::vector<double>& obs,
                             const std::array<double, kActionDim>& noise);

// Deterministic readout: tanh of the mean head.
std::array<double, kActionDim> policy_mean_action(
    const MlpParams& policy, const std::vector<double>& obs);

// Batched sampling with everything backward needs.
struct PolicyBatch {
  MlpCache cache;
  Mat net_out;   // B x 4
  Mat pre_tanh;  // B x 2, mean + sigma * noise
  Mat action;    // B x 2
  Mat log_std;   // B x 2, bounded
  Mat sigma;     // B x 2
  Mat noise;     // B x 2
  std::vector<double> log_prob;  // B
};

void policy_forward_batch(const MlpParams& policy, const Mat& obs,
                          const Mat& noise, PolicyBatch& out);

// Backpropagates d(loss)/d(action) (B x 2) and d(loss)/d(log_prob) (B)
// through the squash, the Gaussian reparameterization, and the network.
void policy_backward_batch(const MlpParams& policy, const PolicyBatch& batch,
                           const Mat& d_action,
                           const std::vector<double>& d_log_prob,
                           MlpGrads& grads);

}  // namespace apex
