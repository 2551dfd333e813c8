#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dpmf/simd.hpp"

namespace dpmf::simd {
namespace {

Isa detect() noexcept {
  Isa best = Isa::Scalar;
  if (isa_available(Isa::Avx2)) best = Isa::Avx2;
  if (const char* env = std::getenv("DPMF_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return best;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t expected, std::size_t got) {
  if (expected != got) throw std::invalid_argument("simd: span length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(DPMF_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) noexcept {
  if (!isa_available(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

void ard_sqdist_row(std::span<const double> coords, std::size_t dims, std::size_t n,
                    std::size_t row, std::span<double> out) {
  check_sizes(dims * n, coords.size());
  check_sizes(n, out.size());
#if defined(DPMF_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::ard_sqdist_row(coords.data(), dims, n, row, out.data());
#endif
  scalar::ard_sqdist_row(coords.data(), dims, n, row, out.data());
}

void bvn_logpdf(std::span<const double> d1, std::span<const double> d2,
                std::span<const double> rho, std::span<const double> inv_var,
                std::span<const double> log_norm, std::span<double> out) {
  const std::size_t n = d1.size();
  check_sizes(n, d2.size());
  check_sizes(n, rho.size());
  check_sizes(n, inv_var.size());
  check_sizes(n, log_norm.size());
  check_sizes(n, out.size());
#if defined(DPMF_HAVE_AVX2)
  if (active_isa() == Isa::Avx2)
    return avx2::bvn_logpdf(d1.data(), d2.data(), rho.data(), inv_var.data(), log_norm.data(), n,
                            out.data());
#endif
  scalar::bvn_logpdf(d1.data(), d2.data(), rho.data(), inv_var.data(), log_norm.data(), n,
                     out.data());
}

double bvn_logpdf_sum(std::span<const double> d1, std::span<const double> d2, double sigma,
                      double rho) {
  const std::size_t n = d1.size();
  check_sizes(n, d2.size());
  double quad = 0.0;
#if defined(DPMF_HAVE_AVX2)
  if (active_isa() == Isa::Avx2)
    quad = avx2::bvn_quad_sum(d1.data(), d2.data(), rho, n);
  else
#endif
    quad = scalar::bvn_quad_sum(d1.data(), d2.data(), rho, n);
  const double s2 = sigma * sigma;
  const double one_m_r2 = 1.0 - rho * rho;
  const double log_norm = -std::log(2.0 * std::numbers::pi * s2 * std::sqrt(one_m_r2));
  return static_cast<double>(n) * log_norm - 0.5 * quad / (s2 * one_m_r2);
}

}  // namespace dpmf::simd
