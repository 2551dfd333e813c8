#pragma once

// Data-parallel inner loops with a scalar reference path and vectorized
// variants. The variant is chosen once per process from the host CPU; the
// DPMF_SIMD environment variable ("scalar" or "avx2") overrides it.

#include <cstddef>
#include <span>
#include <string_view>

namespace dpmf::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when `isa` was compiled in and the CPU reports support.
bool isa_available(Isa isa) noexcept;

/// The ISA the dispatched entry points below use.
Isa active_isa() noexcept;

/// Forces a variant for the remainder of the process (tests and benchmarks).
/// Returns false and leaves the selection unchanged when unavailable.
bool set_active_isa(Isa isa) noexcept;

// Column-major scaled coordinates: `coords` holds `dims` columns of length
// `n`, already divided by their length scales.
//   out[j] = sum_d (coords[d*n + row] - coords[d*n + j])^2,  j in [0, n)
void ard_sqdist_row(std::span<const double> coords, std::size_t dims, std::size_t n,
                    std::size_t row, std::span<double> out);

// Per-element bivariate normal log density with unit-correlation layout:
//   out[i] = log_norm[i] - 0.5 * inv_var[i] * (d1^2 - 2 rho d1 d2 + d2^2)
// where inv_var = 1 / (sigma^2 (1 - rho^2)) and log_norm = -log(2 pi sigma^2 sqrt(1 - rho^2)).
void bvn_logpdf(std::span<const double> d1, std::span<const double> d2,
                std::span<const double> rho, std::span<const double> inv_var,
                std::span<const double> log_norm, std::span<double> out);

// Sum over i of the bivariate normal log density with one shared (sigma, rho).
double bvn_logpdf_sum(std::span<const double> d1, std::span<const double> d2, double sigma,
                      double rho);

namespace scalar {
void ard_sqdist_row(const double* coords, std::size_t dims, std::size_t n, std::size_t row,
                    double* out);
void bvn_logpdf(const double* d1, const double* d2, const double* rho, const double* inv_var,
                const double* log_norm, std::size_t n, double* out);
double bvn_quad_sum(const double* d1, const double* d2, double rho, std::size_t n);
}  // namespace scalar

#if defined(DPMF_HAVE_AVX2)
namespace avx2 {
void ard_sqdist_row(const double* coords, std::size_t dims, std::size_t n, std::size_t row,
                    double* out);
void bvn_logpdf(const double* d1, const double* d2, const double* rho, const double* inv_var,
                const double* log_norm, std::size_t n, double* out);
double bvn_quad_sum(const double* d1, const double* d2, double rho, std::size_t n);
}  // namespace avx2
#endif

}  // namespace dpmf::simd
