#include "apex/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace apex {

int64_t MlpParams::param_count() const {
  int64_t n = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    n += static_cast<int64_t>(spec.layer_in(l) + 1) * spec.layer_out(l);
  }
  return n;
}

bool MlpParams::finite() const {
  for (const Mat& w : weights) {
    for (double v : w.d) {
      if (!std::isfinite(v)) return false;
    }
  }
  for (const auto& b : biases) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void MlpGrads::init_like(const MlpParams& params) {
  weights.resize(params.weights.size());
  biases.resize(params.biases.size());
  for (size_t l = 0; l < params.weights.size(); ++l) {
    weights[l].resize(params.weights[l].rows, params.weights[l].cols);
    biases[l].assign(params.biases[l].size(), 0.0);
  }
}

void MlpGrads::scale(double s) {
  for (Mat& w : weights) {
    for (double& v : w.d) v *= s;
  }
  for (auto& b : biases) {
    for (double& v : b) v *= s;
  }
}

MlpParams mlp_init(const MlpSpec& spec, Rng& rng, double output_scale) {
  MlpParams p;
  p.spec = spec;
  int layers = spec.num_layers();
  p.weights.resize(layers);
  p.biases.resize(layers);
  for (int l = 0; l < layers; ++l) {
    int in = spec.layer_in(l);
    int out = spec.layer_out(l);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    if (l == layers - 1) bound *= output_scale;
    p.weights[l].resize(in, out);
    for (double& v : p.weights[l].d) v = rng.uniform(-bound, bound);
    p.biases[l].assign(out, 0.0);
    for (double& v : p.biases[l]) v = rng.uniform(-bound, bound);
  }
  return p;
}

void mlp_forward(const MlpParams& params, const Mat& input, Mat& output,
                 MlpCache* cache) {
  if (input.cols != params.spec.input_dim) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  int layers = params.spec.num_layers();
  if (cache) {
    cache->input = input;
    cache->pre.resize(layers);
    cache->post.resize(layers - 1);
  }
  Mat cur = input;
  Mat pre;
  for (int l = 0; l < layers; ++l) {
    Mat z;
    kernels::matmul(cur, params.weights[l], z);
    kernels::add_bias(z, params.biases[l], z);
    if (cache) cache->pre[l] = z;
    if (l < layers - 1) {
      kernels::relu(z, z);
      if (cache) cache->post[l] = z;
      cur = std::move(z);
    } else {
      output = std::move(z);
    }
  }
}

void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Mat& d_output, MlpGrads& grads, Mat* d_input) {
  int layers = params.spec.num_layers();
  if (static_cast<int>(cache.pre.size()) != layers ||
      cache.input.rows != d_output.rows ||
      d_output.cols != params.spec.output_dim) {
    throw std::invalid_argument("mlp_backward: cache/gradient mismatch");
  }
  grads.init_like(params);

  Mat delta = d_output;
  for (int l = layers - 1; l >= 0; --l) {
    const Mat& layer_in = l == 0 ? cache.input : cache.post[l - 1];
    kernels::matmul_tn(layer_in, delta, grads.weights[l]);
    kernels::column_sums(delta, grads.biases[l]);
    if (l == 0 && d_input == nullptr) break;
    Mat d_prev;
    kernels::matmul_nt(delta, params.weights[l], d_prev);
    if (l == 0) {
      *d_input = std::move(d_prev);
    } else {
      kernels::relu_backward(cache.pre[l - 1], d_prev, d_prev);
      delta = std::move(d_prev);
    }
  }
}

void polyak_update(MlpParams& target, const MlpParams& online, double tau) {
  // Two-product form rather than t += tau*(o - t): it honors the contract
  // exactly at the endpoints (tau = 1 copies online bit for bit).
  double keep = 1.0 - tau;
  for (size_t l = 0; l < target.weights.size(); ++l) {
    double* t = target.weights[l].d.data();
    const double* o = online.weights[l].d.data();
    for (size_t i = 0; i < target.weights[l].d.size(); ++i) {
      t[i] = keep * t[i] + tau * o[i];
    }
    for (size_t i = 0; i < target.biases[l].size(); ++i) {
      target.biases[l][i] =
          keep * target.biases[l][i] + tau * online.biases[l][i];
    }
  }
}

}  // namespace apex
