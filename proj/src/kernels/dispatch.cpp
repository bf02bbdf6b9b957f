#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "nushu/kernels.hpp"

namespace nushu::kernels {

#ifdef NUSHU_HAVE_AVX2_TU
const KernelTable* avx2_table_unchecked();
#endif
#ifdef NUSHU_HAVE_NEON_TU
const KernelTable* neon_table_unchecked();
#endif

const KernelTable* avx2_table() {
#ifdef NUSHU_HAVE_AVX2_TU
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#ifdef NUSHU_HAVE_NEON_TU
  return neon_table_unchecked();  // Advanced SIMD is mandatory on AArch64
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* best_available() {
  if (const auto* t = avx2_table()) return t;
  if (const auto* t = neon_table()) return t;
  return &scalar_table();
}

const KernelTable* by_name(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "neon") return neon_table();
  return nullptr;
}

const KernelTable* initial() {
  if (const char* env = std::getenv("NUSHU_SIMD"); env != nullptr && *env) {
    if (const auto* t = by_name(env)) return t;
  }
  return best_available();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Backend b) {
  const KernelTable* t = nullptr;
  switch (b) {
    case Backend::Scalar: t = &scalar_table(); break;
    case Backend::Avx2: t = avx2_table(); break;
    case Backend::Neon: t = neon_table(); break;
  }
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

bool select(std::string_view name) {
  const KernelTable* t = by_name(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace nushu::kernels
