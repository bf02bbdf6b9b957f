#pragma once

// Dense double-precision kernels used by the embedding and seq2seq trainers.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2+FMA on x86-64, NEON on AArch64). The variant is chosen once at
// startup from CPU features; NUSHU_SIMD=scalar|avx2|neon overrides it.
// SIMD variants reassociate sums, so results agree with the reference to
// rounding error rather than bitwise. Within one process the choice is
// fixed, which keeps seeded runs bit-reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace nushu::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += W x, W row-major rows x cols
  void (*gemv_acc)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += W^T g, W row-major rows x cols, g has `rows` entries, y has `cols`
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* g, double* y);
  // W += alpha * g x^T
  void (*ger_acc)(double alpha, const double* g, std::size_t rows, const double* x, std::size_t cols,
                  double* w);
};

const KernelTable& scalar_table();
/// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Currently selected table.
const KernelTable& active();
/// Selects a backend; returns false (leaving the selection unchanged) if it
/// is unavailable on this machine.
bool select(Backend b);
bool select(std::string_view name);

// Span conveniences over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace nushu::kernels
