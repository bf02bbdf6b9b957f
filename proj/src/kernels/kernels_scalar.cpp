#include "nushu/kernels.hpp"

namespace nushu::kernels {

namespace {

double dot_ref(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_ref(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_acc_ref(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_ref(w + r * cols, x, cols);
}

void gemv_t_acc_ref(const double* w, std::size_t rows, std::size_t cols, const double* g, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_ref(g[r], w + r * cols, y, cols);
  }
}

void ger_acc_ref(double alpha, const double* g, std::size_t rows, const double* x, std::size_t cols, double* w) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double a = alpha * g[r];
    if (a != 0.0) axpy_ref(a, x, w + r * cols, cols);
  }
}

const KernelTable kScalar{Backend::Scalar, "scalar", dot_ref, axpy_ref, gemv_acc_ref, gemv_t_acc_ref, ger_acc_ref};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace nushu::kernels
