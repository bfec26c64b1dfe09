#include <atomic>
#include <limits>

#include "detloop/simd.hpp"

namespace detloop::simd {

#ifndef DETLOOP_WITH_AVX2
namespace avx2 {
// Not compiled in; dispatch never selects these.
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  scalar::axpy(alpha, x, y, n);
}
double dot(const double* x, const double* y, std::size_t n) noexcept {
  return scalar::dot(x, y, n);
}
}  // namespace avx2
#endif

namespace {

bool detect_avx2() noexcept {
#if defined(DETLOOP_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<int>& isa_slot() noexcept {
  static std::atomic<int> slot{static_cast<int>(detect_avx2() ? Isa::Avx2 : Isa::Scalar)};
  return slot;
}

bool use_avx2() noexcept { return isa_slot().load(std::memory_order_relaxed) == static_cast<int>(Isa::Avx2); }

}  // namespace

Isa active_isa() noexcept { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

bool avx2_available() noexcept {
  static const bool available = detect_avx2();
  return available;
}

void force_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
  isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  if (use_avx2()) {
    avx2::axpy(alpha, x.data(), y.data(), n);
  } else {
    scalar::axpy(alpha, x.data(), y.data(), n);
  }
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  return use_avx2() ? avx2::dot(x.data(), y.data(), n) : scalar::dot(x.data(), y.data(), n);
}

void gemv_rows(std::span<const double> a, std::size_t rows, std::size_t cols,
               std::span<const double> x, std::span<double> out) noexcept {
  const bool vec = use_avx2();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    out[r] = vec ? avx2::dot(row, x.data(), cols) : scalar::dot(row, x.data(), cols);
  }
}

double max_row_dot(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::size_t* argmax) noexcept {
  const bool vec = use_avx2();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_row = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    const double v = vec ? avx2::dot(row, x.data(), cols) : scalar::dot(row, x.data(), cols);
    if (v > best) {
      best = v;
      best_row = r;
    }
  }
  if (argmax != nullptr) *argmax = best_row;
  return best;
}

}  // namespace detloop::simd
