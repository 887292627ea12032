#include "apex/sac.hpp"

#include <cmath>
#include <sstream>

#include "apex/error.hpp"

namespace apex {

struct SacLearner::PolicyEval {
  PolicyBatch pb;
  Mat sa;            // obs ++ fresh action
  Mat q1_out, q2_out;
  MlpCache q1_cache, q2_cache;
  std::vector<double> min_q;
};

SacLearner::SacLearner(const SacConfig& config, uint64_t seed)
    : cfg_(config), rng_(derive_seed(seed, 0x5ac1)) {
  Rng init_rng(derive_seed(seed, 0x5ac0));
  policy_ = policy_init(cfg_.obs_dim, cfg_.hidden, init_rng, cfg_.policy_init);
  MlpSpec q_spec{cfg_.obs_dim + kActionDim, cfg_.hidden, 1};
  MlpSpec v_spec{cfg_.obs_dim, cfg_.hidden, 1};
  q1_ = mlp_init(q_spec, init_rng);
  q2_ = mlp_init(q_spec, init_rng);
  value_ = mlp_init(v_spec, init_rng);
  value_target_ = value_;
  q1_target_ = q1_;
  q2_target_ = q2_;
  opt_policy_.lr = opt_q1_.lr = opt_q2_.lr = opt_value_.lr = cfg_.lr;
  opt_policy_.init(policy_);
  opt_q1_.init(q1_);
  opt_q2_.init(q2_);
  opt_value_.init(value_);
}

int64_t SacLearner::online_param_count() const {
  return policy_.param_count() + q1_.param_count() + q2_.param_count() +
         value_.param_count();
}

Mat SacLearner::concat_action(const Mat& obs, const Mat& action) {
  Mat sa(obs.rows, obs.cols + action.cols);
  for (int r = 0; r < obs.rows; ++r) {
    double* dst = sa.row(r);
    const double* o = obs.row(r);
    const double* a = action.row(r);
    for (int j = 0; j < obs.cols; ++j) dst[j] = o[j];
    for (int j = 0; j < action.cols; ++j) dst[obs.cols + j] = a[j];
  }
  return sa;
}

void SacLearner::eval_policy(const Mat& obs, const Mat& noise,
                             PolicyEval& out) {
  policy_forward_batch(policy_, obs, noise, out.pb);
  out.sa = concat_action(obs, out.pb.action);
  mlp_forward(q1_, out.sa, out.q1_out, &out.q1_cache);
  mlp_forward(q2_, out.sa, out.q2_out, &out.q2_cache);
  out.min_q.resize(obs.rows);
  for (int r = 0; r < obs.rows; ++r) {
    out.min_q[r] = std::min(out.q1_out.at(r, 0), out.q2_out.at(r, 0));
  }
}

void SacLearner::policy_grads_from_eval(const Mat& obs, PolicyEval& eval,
                                        MlpGrads& grads) {
  int b = obs.rows;
  double inv_b = 1.0 / b;
  // d(policy_loss)/d(min_q) = -1/B; route through whichever Q net attains
  // the minimum. Q parameters are not updated from this loss — only the
  // gradient with respect to the action input is kept.
  Mat d_q1(b, 1), d_q2(b, 1);
  for (int r = 0; r < b; ++r) {
    bool first = eval.q1_out.at(r, 0) <= eval.q2_out.at(r, 0);
    d_q1.at(r, 0) = first ? -inv_b : 0.0;
    d_q2.at(r, 0) = first ? 0.0 : -inv_b;
  }
  MlpGrads scratch;
  Mat d_sa1, d_sa2;
  mlp_backward(q1_, eval.q1_cache, d_q1, scratch, &d_sa1);
  mlp_backward(q2_, eval.q2_cache, d_q2, scratch, &d_sa2);
  Mat d_action(b, kActionDim);
  for (int r = 0; r < b; ++r) {
    for (int i = 0; i < kActionDim; ++i) {
      d_action.at(r, i) =
          d_sa1.at(r, obs.cols + i) + d_sa2.at(r, obs.cols + i);
    }
  }
  std::vector<double> d_logp(b, inv_b);
  policy_backward_batch(policy_, eval.pb, d_action, d_logp, grads);
}

double SacLearner::policy_objective(const Mat& obs, const Mat& noise,
                                    MlpGrads* grads) {
  PolicyEval eval;
  eval_policy(obs, noise, eval);
  double loss = 0.0;
  for (int r = 0; r < obs.rows; ++r) {
    loss += eval.pb.log_prob[r] - eval.min_q[r];
  }
  loss /= obs.rows;
  if (grads) policy_grads_from_eval(obs, eval, *grads);
  return loss;
}

SacDiagnostics SacLearner::update(const ReplayBuffer::NstepBatch& batch) {
  int b = batch.obs.rows;
  double inv_b = 1.0 / b;
  SacDiagnostics diag;

  // Fresh policy actions at s_t, shared by the value and policy losses.
  Mat noise(b, kActionDim);
  for (double& x : noise.d) x = rng_.normal();
  PolicyEval eval;
  eval_policy(batch.obs, noise, eval);

  // n-step Q targets.
  std::vector<double> y_q(b);
  if (cfg_.bootstrap == SacConfig::Bootstrap::kTargetValue) {
    Mat v_next;
    mlp_forward(value_target_, batch.next_obs, v_next);
    for (int r = 0; r < b; ++r) {
      double boot = batch.done[r] ? 0.0 : v_next.at(r, 0);
      y_q[r] = cfg_.reward_scale * batch.reward[r] +
               std::pow(cfg_.gamma, batch.m[r]) * boot;
    }
  } else {
    Mat noise_next(b, kActionDim);
    for (double& x : noise_next.d) x = rng_.normal();
    PolicyBatch pb_next;
    policy_forward_batch(policy_, batch.next_obs, noise_next, pb_next);
    Mat sa_next = concat_action(batch.next_obs, pb_next.action);
    Mat q1n, q2n;
    mlp_forward(q1_target_, sa_next, q1n);
    mlp_forward(q2_target_, sa_next, q2n);
    for (int r = 0; r < b; ++r) {
      double soft = std::min(q1n.at(r, 0), q2n.at(r, 0)) - pb_next.log_prob[r];
      double boot = batch.done[r] ? 0.0 : soft;
      y_q[r] = cfg_.reward_scale * batch.reward[r] +
               std::pow(cfg_.gamma, batch.m[r]) * boot;
    }
  }

  // Q losses at the stored actions.
  Mat sa = concat_action(batch.obs, batch.action);
  Mat q1_out, q2_out;
  MlpCache q1_cache, q2_cache;
  mlp_forward(q1_, sa, q1_out, &q1_cache);
  mlp_forward(q2_, sa, q2_out, &q2_cache);
  Mat d_q1(b, 1), d_q2(b, 1);
  for (int r = 0; r < b; ++r) {
    double e1 = q1_out.at(r, 0) - y_q[r];
    double e2 = q2_out.at(r, 0) - y_q[r];
    diag.q1_loss += e1 * e1 * inv_b;
    diag.q2_loss += e2 * e2 * inv_b;
    d_q1.at(r, 0) = 2.0 * e1 * inv_b;
    d_q2.at(r, 0) = 2.0 * e2 * inv_b;
  }
  MlpGrads g_q1, g_q2;
  mlp_backward(q1_, q1_cache, d_q1, g_q1);
  mlp_backward(q2_, q2_cache, d_q2, g_q2);

  // Value loss toward min-Q minus log-prob at the fresh actions.
  Mat v_out;
  MlpCache v_cache;
  mlp_forward(value_, batch.obs, v_out, &v_cache);
  Mat d_v(b, 1);
  for (int r = 0; r < b; ++r) {
    double target = eval.min_q[r] - eval.pb.log_prob[r];
    double e = v_out.at(r, 0) - target;
    diag.value_loss += e * e * inv_b;
    d_v.at(r, 0) = 2.0 * e * inv_b;
    diag.mean_q += eval.min_q[r] * inv_b;
    diag.mean_v += v_out.at(r, 0) * inv_b;
    diag.mean_log_prob += eval.pb.log_prob[r] * inv_b;
    diag.policy_loss += (eval.pb.log_prob[r] - eval.min_q[r]) * inv_b;
  }
  MlpGrads g_v;
  mlp_backward(value_, v_cache, d_v, g_v);

  MlpGrads g_policy;
  policy_grads_from_eval(batch.obs, eval, g_policy);

  bool finite = std::isfinite(diag.q1_loss) && std::isfinite(diag.q2_loss) &&
                std::isfinite(diag.value_loss) &&
                std::isfinite(diag.policy_loss);
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite loss in update " << update_count_
        << ": q1=" << diag.q1_loss << " q2=" << diag.q2_loss
        << " v=" << diag.value_loss << " pi=" << diag.policy_loss
        << " mean_q=" << diag.mean_q << " mean_logp=" << diag.mean_log_prob;
    throw TrainingFault(msg.str());
  }

  // All gradients above came from the pre-step parameter snapshot; only now
  // are the four networks stepped, then the targets smoothed.
  opt_q1_.step(q1_, g_q1);
  opt_q2_.step(q2_, g_q2);
  opt_value_.step(value_, g_v);
  opt_policy_.step(policy_, g_policy);
  polyak_update(value_target_, value_, cfg_.tau);
  polyak_update(q1_target_, q1_, cfg_.tau);
  polyak_update(q2_target_, q2_, cfg_.tau);
  ++update_count_;
  return diag;
}

void SacLearner::pack(Checkpoint& ck) const {
  pack_mlp(ck, "policy", policy_);
  pack_mlp(ck, "q1", q1_);
  pack_mlp(ck, "q2", q2_);
  pack_mlp(ck, "value", value_);
  pack_mlp(ck, "value_target", value_target_);
  pack_mlp(ck, "q1_target", q1_target_);
  pack_mlp(ck, "q2_target", q2_target_);
  pack_adam(ck, "opt_policy", opt_policy_);
  pack_adam(ck, "opt_q1", opt_q1_);
  pack_adam(ck, "opt_q2", opt_q2_);
  pack_adam(ck, "opt_value", opt_value_);
  pack_rng(ck, "learner_rng", rng_);
  ck.ints["update_count"] = update_count_;
}

SacLearner SacLearner::unpack(const Checkpoint& ck, const SacConfig& config) {
  SacLearner learner(config, 0);
  learner.policy_ = unpack_mlp(ck, "policy");
  if (learner.policy_.spec.input_dim != config.obs_dim) {
    throw ConfigError("checkpoint policy input dimension mismatch");
  }
  learner.q1_ = unpack_mlp(ck, "q1");
  learner.q2_ = unpack_mlp(ck, "q2");
  learner.value_ = unpack_mlp(ck, "value");
  learner.value_target_ = unpack_mlp(ck, "value_target");
  learner.q1_target_ = unpack_mlp(ck, "q1_target");
  learner.q2_target_ = unpack_mlp(ck, "q2_target");
  learner.opt_policy_ = unpack_adam(ck, "opt_policy", learner.policy_);
  learner.opt_q1_ = unpack_adam(ck, "opt_q1", learner.q1_);
  learner.opt_q2_ = unpack_adam(ck, "opt_q2", learner.q2_);
  learner.opt_value_ = unpack_adam(ck, "opt_value", learner.value_);
  learner.rng_ = unpack_rng(ck, "learner_rng");
  learner.update_count_ = ck.require_int("update_count");
  return learner;
}

}  // namespace apex
