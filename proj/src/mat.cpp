#include "apex/mat.hpp"

#include <algorithm>
#include <atomic>

namespace apex::kernels {

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

// Each output element accumulates over p in ascending order, so any row
// partition (serial, OpenMP, or the register blocking below) produces
// bit-identical results: per-element work never crosses a row boundary.
constexpr int kRowBlock = 4;
constexpr int kColBlock = 8;  // one cache line of doubles

#if defined(__GNUC__) || defined(__clang__)
// Compiler vector type: GCC 11's auto-vectorizer spills the accumulator
// arrays of the blocked kernel, so spell the registers out. The extension
// lowers to whatever SIMD width the target has (one zmm with AVX-512).
// Loads and stores go through memcpy, so row alignment never matters.
typedef double Vd __attribute__((vector_size(kColBlock * sizeof(double))));

static inline Vd load_vd(const double* p) {
  Vd v;
  __builtin_memcpy(&v, p, sizeof(v));
  return v;
}

static inline void store_vd(double* p, Vd v) { __builtin_memcpy(p, &v, sizeof(v)); }

// 4x8 register-blocked core: the accumulators live in registers across the
// whole k loop instead of re-storing the output row per k step, which is
// what limits the textbook axpy form.
static void matmul_block(const double* a0, const double* a1, const double* a2,
                         const double* a3, const Mat& b, int j, int k,
                         double* c0, double* c1, double* c2, double* c3) {
  Vd acc0 = {}, acc1 = {}, acc2 = {}, acc3 = {};
  for (int p = 0; p < k; ++p) {
    const Vd bp = load_vd(b.row(p) + j);
    acc0 += a0[p] * bp;
    acc1 += a1[p] * bp;
    acc2 += a2[p] * bp;
    acc3 += a3[p] * bp;
  }
  store_vd(c0 + j, acc0);
  store_vd(c1 + j, acc1);
  store_vd(c2 + j, acc2);
  store_vd(c3 + j, acc3);
}

static void matmul_strip(const double* ai, const Mat& b, int j, int k,
                         double* ci) {
  Vd acc = {};
  for (int p = 0; p < k; ++p) acc += ai[p] * load_vd(b.row(p) + j);
  store_vd(ci + j, acc);
}
#else
static void matmul_block(const double* a0, const double* a1, const double* a2,
                         const double* a3, const Mat& b, int j, int k,
                         double* c0, double* c1, double* c2, double* c3) {
  double acc0[kColBlock] = {0}, acc1[kColBlock] = {0};
  double acc2[kColBlock] = {0}, acc3[kColBlock] = {0};
  for (int p = 0; p < k; ++p) {
    const double* bp = b.row(p) + j;
    for (int t = 0; t < kColBlock; ++t) {
      acc0[t] += a0[p] * bp[t];
      acc1[t] += a1[p] * bp[t];
      acc2[t] += a2[p] * bp[t];
      acc3[t] += a3[p] * bp[t];
    }
  }
  for (int t = 0; t < kColBlock; ++t) {
    c0[j + t] = acc0[t];
    c1[j + t] = acc1[t];
    c2[j + t] = acc2[t];
    c3[j + t] = acc3[t];
  }
}

static void matmul_strip(const double* ai, const Mat& b, int j, int k,
                         double* ci) {
  double acc[kColBlock] = {0};
  for (int p = 0; p < k; ++p) {
    const double* bp = b.row(p) + j;
    for (int t = 0; t < kColBlock; ++t) acc[t] += ai[p] * bp[t];
  }
  for (int t = 0; t < kColBlock; ++t) ci[j + t] = acc[t];
}
#endif

static void matmul_one_row(const double* ai, const Mat& b, Mat& c, int i) {
  const int n = b.cols, k = b.rows;
  double* ci = c.row(i);
  int j = 0;
  for (; j + kColBlock <= n; j += kColBlock) matmul_strip(ai, b, j, k, ci);
  for (; j < n; ++j) {
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += ai[p] * b.at(p, j);
    ci[j] = acc;
  }
}

static void matmul_rows(const Mat& a, const Mat& b, Mat& c, int i0, int i1) {
  const int n = b.cols, k = a.cols;
  int i = i0;
  for (; i + kRowBlock <= i1; i += kRowBlock) {
    const double *a0 = a.row(i), *a1 = a.row(i + 1);
    const double *a2 = a.row(i + 2), *a3 = a.row(i + 3);
    double *c0 = c.row(i), *c1 = c.row(i + 1);
    double *c2 = c.row(i + 2), *c3 = c.row(i + 3);
    int j = 0;
    for (; j + kColBlock <= n; j += kColBlock) {
      matmul_block(a0, a1, a2, a3, b, j, k, c0, c1, c2, c3);
    }
    for (; j < n; ++j) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (int p = 0; p < k; ++p) {
        const double bpj = b.at(p, j);
        s0 += a0[p] * bpj;
        s1 += a1[p] * bpj;
        s2 += a2[p] * bpj;
        s3 += a3[p] * bpj;
      }
      c0[j] = s0;
      c1[j] = s1;
      c2[j] = s2;
      c3[j] = s3;
    }
  }
  for (; i < i1; ++i) matmul_one_row(a.row(i), b, c, i);
}

void matmul_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows);
  c.resize(a.rows, b.cols);
  matmul_rows(a, b, c, 0, a.rows);
}

void matmul_omp(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows);
  c.resize(a.rows, b.cols);
  const int blocks = (a.rows + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < blocks; ++bi) {
    const int lo = bi * kRowBlock;
    matmul_rows(a, b, c, lo, std::min(a.rows, lo + kRowBlock));
  }
}

void matmul(const Mat& a, const Mat& b, Mat& c) {
  if (g_parallel.load() && a.rows >= 8)
    matmul_omp(a, b, c);
  else
    matmul_serial(a, b, c);
}

// The transposed forms run through the same blocked core against an
// explicit transpose; the copy is O(rows*cols) against the O(m*n*k)
// multiply and buys back unit-stride inner loops. Per-element accumulation
// stays p-ascending, identical to the textbook three-loop form.
static void transpose_into(const Mat& b, Mat& bt) {
  bt.resize(b.cols, b.rows);
  for (int i = 0; i < b.rows; ++i) {
    const double* src = b.row(i);
    for (int j = 0; j < b.cols; ++j) bt.at(j, i) = src[j];
  }
}

void matmul_tn_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.rows == b.rows);
  Mat at;
  transpose_into(a, at);
  c.resize(at.rows, b.cols);
  matmul_rows(at, b, c, 0, at.rows);
}

void matmul_tn_omp(const Mat& a, const Mat& b, Mat& c) {
  assert(a.rows == b.rows);
  Mat at;
  transpose_into(a, at);
  c.resize(at.rows, b.cols);
  const int blocks = (at.rows + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < blocks; ++bi) {
    const int lo = bi * kRowBlock;
    matmul_rows(at, b, c, lo, std::min(at.rows, lo + kRowBlock));
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& c) {
  if (g_parallel.load() && a.cols >= 8)
    matmul_tn_omp(a, b, c);
  else
    matmul_tn_serial(a, b, c);
}

void matmul_nt_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.cols);
  Mat bt;
  transpose_into(b, bt);
  c.resize(a.rows, bt.cols);
  matmul_rows(a, bt, c, 0, a.rows);
}

void matmul_nt_omp(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.cols);
  Mat bt;
  transpose_into(b, bt);
  c.resize(a.rows, bt.cols);
  const int blocks = (a.rows + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < blocks; ++bi) {
    const int lo = bi * kRowBlock;
    matmul_rows(a, bt, c, lo, std::min(a.rows, lo + kRowBlock));
  }
}

void matmul_nt(const Mat& a, const Mat& b, Mat& c) {
  if (g_parallel.load() && a.rows >= 8)
    matmul_nt_omp(a, b, c);
  else
    matmul_nt_serial(a, b, c);
}

// Resize that tolerates `m` aliasing a kernel input: when the shape already
// matches it leaves the contents alone instead of zero-filling.
static void ensure_shape(Mat& m, int rows, int cols) {
  if (m.rows != rows || m.cols != cols) m.resize(rows, cols);
}

void add_bias(const Mat& in, const std::vector<double>& bias, Mat& out) {
  assert(static_cast<int>(bias.size()) == in.cols);
  ensure_shape(out, in.rows, in.cols);
  for (int i = 0; i < in.rows; ++i) {
    const double* src = in.row(i);
    double* dst = out.row(i);
    for (int j = 0; j < in.cols; ++j) dst[j] = src[j] + bias[j];
  }
}

void relu(const Mat& in, Mat& out) {
  ensure_shape(out, in.rows, in.cols);
  for (size_t i = 0; i < in.size(); ++i)
    out.d[i] = in.d[i] > 0.0 ? in.d[i] : 0.0;
}

void relu_backward(const Mat& pre, const Mat& dy, Mat& dx) {
  assert(pre.rows == dy.rows && pre.cols == dy.cols);
  ensure_shape(dx, dy.rows, dy.cols);
  for (size_t i = 0; i < dy.size(); ++i)
    dx.d[i] = pre.d[i] > 0.0 ? dy.d[i] : 0.0;
}

void column_sums(const Mat& dy, std::vector<double>& out) {
  out.assign(dy.cols, 0.0);
  for (int i = 0; i < dy.rows; ++i) {
    const double* r = dy.row(i);
    for (int j = 0; j < dy.cols; ++j) out[j] += r[j];
  }
}

}  // namespace apex::kernels
