#include "apex/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace apex {
namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

double bounded_log_std(double raw, double* d_draw = nullptr) {
  double t = std::tanh(raw);
  if (d_draw) *d_draw = 0.5 * (kLogStdMax - kLogStdMin) * (1.0 - t * t);
  return kLogStdMin + 0.5 * (kLogStdMax - kLogStdMin) * (t + 1.0);
}

}  // namespace

MlpParams policy_init(int obs_dim, const std::vector<int>& hidden, Rng& rng,
                      const PolicyInit& init) {
  MlpSpec spec{obs_dim, hidden, 2 * kActionDim};
  MlpParams p = mlp_init(spec, rng, init.output_scale);
  // Invert the tanh bound to find the raw bias giving the requested std.
  double target = std::log(init.initial_std);
  double t = 2.0 * (target - kLogStdMin) / (kLogStdMax - kLogStdMin) - 1.0;
  double raw = std::atanh(t);
  auto& out_bias = p.biases.back();
  for (int i = 0; i < kActionDim; ++i) out_bias[kActionDim + i] = raw;
  return p;
}

void policy_forward_batch(const MlpParams& policy, const Mat& obs,
                          const Mat& noise, PolicyBatch& out) {
  if (noise.rows != obs.rows || noise.cols != kActionDim) {
    throw std::invalid_argument("policy_forward_batch: noise shape mismatch");
  }
  int b = obs.rows;
  mlp_forward(policy, obs, out.net_out, &out.cache);
  out.noise = noise;
  out.pre_tanh.resize(b, kActionDim);
  out.action.resize(b, kActionDim);
  out.log_std.resize(b, kActionDim);
  out.sigma.resize(b, kActionDim);
  out.log_prob.assign(b, 0.0);
  for (int r = 0; r < b; ++r) {
    const double* net = out.net_out.row(r);
    double logp = 0.0;
    for (int i = 0; i < kActionDim; ++i) {
      double mu = net[i];
      double log_std = bounded_log_std(net[kActionDim + i]);
      double sigma = std::exp(log_std);
      double eps = noise.at(r, i);
      double u = mu + sigma * eps;
      double a = std::tanh(u);
      out.log_std.at(r, i) = log_std;
      out.sigma.at(r, i) = sigma;
      out.pre_tanh.at(r, i) = u;
      out.action.at(r, i) = a;
      logp += -0.5 * eps * eps - log_std - kHalfLog2Pi -
              std::log(1.0 - a * a + kSquashEps);
    }
    out.log_prob[r] = logp;
  }
}

void policy_backward_batch(const MlpParams& policy, const PolicyBatch& batch,
                           const Mat& d_action,
                           const std::vector<double>& d_log_prob,
                           MlpGrads& grads) {
  int b = batch.action.rows;
  Mat d_net(b, 2 * kActionDim);
  for (int r = 0; r < b; ++r) {
    double dl = d_log_prob[r];
    for (int i = 0; i < kActionDim; ++i) {
      double a = batch.action.at(r, i);
      double sigma = batch.sigma.at(r, i);
      double eps = batch.noise.at(r, i);
      double one_m_a2 = 1.0 - a * a;
      // d log_prob / d u through the squash correction term.
      double dlogp_du = 2.0 * a * one_m_a2 / (one_m_a2 + kSquashEps);
      double du = d_action.at(r, i) * one_m_a2 + dl * dlogp_du;
      double d_mu = du;
      double d_log_std = du * sigma * eps - dl;
      double d_raw_bound;
      bounded_log_std(batch.net_out.at(r, kActionDim + i), &d_raw_bound);
      d_net.at(r, i) = d_mu;
      d_net.at(r, kActionDim + i) = d_log_std * d_raw_bound;
    }
  }
  mlp_backward(policy, batch.cache, d_net, grads);
}

PolicyOutput sample_squashed(const MlpParams& policy,
                             const std::vector<double>& obs,
                             const std::array<double, kActionDim>& noise) {
  Mat obs_m(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) obs_m.at(0, static_cast<int>(i)) = obs[i];
  Mat noise_m(1, kActionDim);
  for (int i = 0; i < kActionDim; ++i) noise_m.at(0, i) = noise[i];
  PolicyBatch batch;
  policy_forward_batch(policy, obs_m, noise_m, batch);
  PolicyOutput out;
  for (int i = 0; i < kActionDim; ++i) {
    out.mean[i] = batch.net_out.at(0, i);
    out.log_std[i] = batch.log_std.at(0, i);
    out.action[i] = batch.action.at(0, i);
  }
  out.log_prob = batch.log_prob[0];
  return out;
}

std::array<double, kActionDim> policy_mean_action(
    const MlpParams& policy, const std::vector<double>& obs) {
  Mat obs_m(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) obs_m.at(0, static_cast<int>(i)) = obs[i];
  Mat out;
  mlp_forward(policy, obs_m, out);
  std::array<double, kActionDim> action{};
  for (int i = 0; i < kActionDim; ++i) action[i] = std::tanh(out.at(0, i));
  return action;
}

}  // namespace apex
