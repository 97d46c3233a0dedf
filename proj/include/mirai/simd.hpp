#pragma once

// Data-parallel inner loops shared by the models and metrics.
//
// Every kernel has a portable scalar reference implementation and, where the
// platform offers it, a vectorized variant (AVX2+FMA on x86-64, NEON on
// AArch64). The variant is selected once at runtime from CPU features; the
// MIRAI_SIMD environment variable ("scalar", "avx2", "neon") overrides the
// choice. Vector variants reassociate sums, so they agree with the scalar
// reference to rounding, not bitwise.

#include <cstddef>
#include <span>

#include "mirai/common.hpp"

namespace mirai::simd {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Switches the process-wide kernel table. Throws ConfigError when the ISA is
/// not available on this CPU.
void force_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// out(i, j) = |a_i - b_j|^2; out is resized to a.rows() x b.rows().
void pairwise_squared_distances(const Matrix& a, const Matrix& b, Matrix& out);

// Raw kernels, exposed for equivalence tests and benchmarks.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace mirai::simd
