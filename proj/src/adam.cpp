#include "apex/adam.hpp"

#include <cmath>

#include "apex/error.hpp"

namespace apex {
namespace {

void update_block(double* p, const double* g, double* m, double* v, size_t n,
                  double lr, double b1, double b2, double eps, double c1,
                  double c2) {
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i])) {
      throw TrainingFault("non-finite gradient in optimizer step");
    }
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    double m_hat = m[i] / c1;
    double v_hat = v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void AdamState::init(const MlpParams& params) {
  step_count = 0;
  m.clear();
  v.clear();
  for (size_t l = 0; l < params.weights.size(); ++l) {
    m.emplace_back(params.weights[l].size(), 0.0);
    v.emplace_back(params.weights[l].size(), 0.0);
    m.emplace_back(params.biases[l].size(), 0.0);
    v.emplace_back(params.biases[l].size(), 0.0);
  }
}

void AdamState::step(MlpParams& params, const MlpGrads& grads) {
  ++step_count;
  double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  size_t block = 0;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    update_block(params.weights[l].d.data(), grads.weights[l].d.data(),
                 m[block].data(), v[block].data(), params.weights[l].size(),
                 lr, beta1, beta2, eps, c1, c2);
    ++block;
    update_block(params.biases[l].data(), grads.biases[l].data(),
                 m[block].data(), v[block].data(), params.biases[l].size(),
                 lr, beta1, beta2, eps, c1, c2);
    ++block;
  }
}

}  // namespace apex
