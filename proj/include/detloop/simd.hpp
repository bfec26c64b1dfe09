#pragma once

// Dense double-precision kernels used by the simplex pivots, the vertex
// scans and the Schur complement assembly of the SDP solver.
//
// Every kernel has a scalar reference implementation (namespace `scalar`)
// and, on x86-64 builds, an AVX2/FMA variant (namespace `avx2`). The
// unqualified entry points dispatch once, at first use, on the CPU features
// reported at runtime. Tests compare the variants against each other.

#include <cstddef>
#include <span>
#include <string_view>

namespace detloop::simd {

enum class Isa { Scalar, Avx2 };

/// Instruction set the dispatching entry points currently use.
Isa active_isa() noexcept;

/// True when the AVX2 variant is compiled in and the CPU supports it.
bool avx2_available() noexcept;

/// Overrides dispatch (tests and benchmarks). Requests for an unavailable
/// ISA fall back to Scalar. Not thread-safe with concurrent kernel calls.
void force_isa(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

double dot(std::span<const double> x, std::span<const double> y) noexcept;

// out[r] = sum_c a[r * cols + c] * x[c]  for a row-major rows x cols matrix.
void gemv_rows(std::span<const double> a, std::size_t rows, std::size_t cols,
               std::span<const double> x, std::span<double> out) noexcept;

// Largest entry of a row-major matrix times vector product; returns the row
// index through `argmax`. Empty input returns -inf.
double max_row_dot(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::size_t* argmax) noexcept;

namespace scalar {
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
}  // namespace avx2

}  // namespace detloop::simd
