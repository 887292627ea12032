#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace apex {

// Dense row-major matrix of doubles. The numeric substrate for the
// networks; small enough that a bespoke type beats pulling in a BLAS.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int i) { return d.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const {
    return d.data() + static_cast<size_t>(i) * cols;
  }
  double& at(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return d[static_cast<size_t>(i) * cols + j];
  }
  size_t size() const { return d.size(); }
  void zero() { std::fill(d.begin(), d.end(), 0.0); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    d.assign(static_cast<size_t>(r) * c, 0.0);
  }
};

// Batched kernels used by the network forward/backward passes. Every
// kernel has a serial reference implementation and an OpenMP variant.
// The parallel variants split work so that each output element is still
// reduced in a fixed serial order, making results bit-identical to the
// serial reference for any thread count.
namespace kernels {

// Process-wide switch between the OpenMP and serial paths.
void set_parallel(bool enabled);
bool parallel_enabled();

// C = A * B
void matmul_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_omp(const Mat& a, const Mat& b, Mat& c);
void matmul(const Mat& a, const Mat& b, Mat& c);

// C = A^T * B  (A is k x m, B is k x n, C is m x n)
void matmul_tn_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_tn_omp(const Mat& a, const Mat& b, Mat& c);
void matmul_tn(const Mat& a, const Mat& b, Mat& c);

// C = A * B^T  (A is m x k, B is n x k, C is m x n)
void matmul_nt_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_nt_omp(const Mat& a, const Mat& b, Mat& c);
void matmul_nt(const Mat& a, const Mat& b, Mat& c);

// out[i][j] = in[i][j] + bias[j]
void add_bias(const Mat& in, const std::vector<double>& bias, Mat& out);

// Rectified linear unit, forward and backward.
void relu(const Mat& in, Mat& out);
// dx[i][j] = pre[i][j] > 0 ? dy[i][j] : 0
void relu_backward(const Mat& pre, const Mat& dy, Mat& dx);

// bias_grad[j] = sum_i dy[i][j], accumulated in row order.
void column_sums(const Mat& dy, std::vector<double>& out);

}  // namespace kernels
}  // namespace apex
