#include <arm_neon.h>

#include "nushu/kernels.hpp"

namespace nushu::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_acc_neon(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_neon(w + r * cols, x, cols);
}

void gemv_t_acc_neon(const double* w, std::size_t rows, std::size_t cols, const double* g, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_neon(g[r], w + r * cols, y, cols);
  }
}

void ger_acc_neon(double alpha, const double* g, std::size_t rows, const double* x, std::size_t cols, double* w) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double a = alpha * g[r];
    if (a != 0.0) axpy_neon(a, x, w + r * cols, cols);
  }
}

const KernelTable kNeon{Backend::Neon, "neon", dot_neon, axpy_neon, gemv_acc_neon, gemv_t_acc_neon, ger_acc_neon};

}  // namespace

const KernelTable* neon_table_unchecked() { return &kNeon; }

}  // namespace nushu::kernels
