#pragma once

#include <cstdint>

#include "apex/checkpoint.hpp"
#include "apex/policy.hpp"
#include "apex/replay.hpp"

namespace apex {

struct SacConfig {
  int obs_dim = 32;
  std::vector<int> hidden{256, 256};
  int batch_size = 4096;
  int updates_per_epoch = 5120;
  double reward_scale = 100.0;  // 1/alpha; rewards are multiplied by this
  double gamma = 0.98;
  int nstep = 5;
  double tau = 0.005;  // target-network smoothing coefficient
  double lr = 3e-4;
  size_t buffer_capacity = 4000000;

  // Whether n-step targets bootstrap from the target value network (the
  // cited soft actor-critic formulation) or from the target Q pair at
  // fresh policy actions. The paper does not say; both are provided.
  enum class Bootstrap { kTargetValue, kTargetQ };
  Bootstrap bootstrap = Bootstrap::kTargetValue;

  PolicyInit policy_init;
};

struct SacDiagnostics {
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  double mean_q = 0.0;        // mean of min(Q1,Q2) at fresh policy actions
  double mean_v = 0.0;
  double mean_log_prob = 0.0;
};

// Soft actor-critic with a separate state-value network, twin Q networks,
// n-step targets, reward scaling, and fixed unit temperature. All four
// gradient sets in update() are computed from the same parameter snapshot
// before any optimizer step is applied.
class SacLearner {
 public:
  SacLearner(const SacConfig& config, uint64_t seed);

  SacDiagnostics update(const ReplayBuffer::NstepBatch& batch);

  const SacConfig& config() const { return cfg_; }
  const MlpParams& policy() const { return policy_; }
  MlpParams& mutable_policy() { return policy_; }
  const MlpParams& q1() const { return q1_; }
  const MlpParams& q2() const { return q2_; }
  const MlpParams& value() const { return value_; }
  const MlpParams& target_value() const { return value_target_; }
  int64_t update_count() const { return update_count_; }
  Rng& rng() { return rng_; }

  // Total trainable parameters across policy, both Q nets, and the value
  // net (online copies only).
  int64_t online_param_count() const;

  // Policy objective mean(log_prob - min_q) on a frozen batch and noise;
  // fills `grads` when non-null. update() minimizes exactly this.
  double policy_objective(const Mat& obs, const Mat& noise, MlpGrads* grads);

  void pack(Checkpoint& ck) const;
  static SacLearner unpack(const Checkpoint& ck, const SacConfig& config);

 private:
  struct PolicyEval;  // fresh-action evaluation shared by update paths

  void eval_policy(const Mat& obs, const Mat& noise, PolicyEval& out);
  void policy_grads_from_eval(const Mat& obs, PolicyEval& eval,
                              MlpGrads& grads);
  static Mat concat_action(const Mat& obs, const Mat& action);

  SacConfig cfg_;
  Rng rng_;
  MlpParams policy_, q1_, q2_, value_, value_target_;
  MlpParams q1_target_, q2_target_;
  AdamState opt_policy_, opt_q1_, opt_q2_, opt_value_;
  int64_t update_count_ = 0;
};

}  // namespace apex
