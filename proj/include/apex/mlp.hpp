#pragma once

#include <cstdint>
#include <vector>

#include "apex/mat.hpp"
#include "apex/rng.hpp"

namespace apex {

// Dense network shape: input -> hidden (rectified linear) ... -> linear output.
struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden{256, 256};
  int output_dim = 0;

  int num_layers() const { return static_cast<int>(hidden.size()) + 1; }
  int layer_in(int l) const {
    return l == 0 ? input_dim : hidden[l - 1];
  }
  int layer_out(int l) const {
    return l == num_layers() - 1 ? output_dim : hidden[l];
  }
  bool operator==(const MlpSpec&) const = default;
};

struct MlpParams {
  MlpSpec spec;
  std::vector<Mat> weights;                 // weights[l]: in x out
  std::vector<std::vector<double>> biases;  // biases[l]: out

  int64_t param_count() const;
  bool finite() const;
};

// Activations cached by forward for the matching backward call.
struct MlpCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // rectified output per hidden layer
};

struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;

  void init_like(const MlpParams& params);
  void scale(double s);
};

// Uniform fan-in initialization, U(-1/sqrt(in), 1/sqrt(in)) for weights and
// biases; the final layer is additionally scaled by `output_scale`.
MlpParams mlp_init(const MlpSpec& spec, Rng& rng, double output_scale = 1.0);

// Batched forward pass: input (batch x in) -> output (batch x out). The
// cache, when given, records what backward needs.
void mlp_forward(const MlpParams& params, const Mat& input, Mat& output,
                 MlpCache* cache = nullptr);

// Reverse-mode gradients of the forward map for the given output gradient
// (batch x out). Fills `grads` (overwrites) and, when non-null, `d_input`
// (batch x in).
void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Mat& d_output, MlpGrads& grads,
                  Mat* d_input = nullptr);

// In-place exponential smoothing toward `online`:
// target <- (1 - tau) * target + tau * online.
void polyak_update(MlpParams& target, const MlpParams& online, double tau);

}  // namespace apex
