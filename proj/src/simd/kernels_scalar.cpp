#include "dpmf/simd.hpp"

namespace dpmf::simd::scalar {

void ard_sqdist_row(const double* coords, std::size_t dims, std::size_t n, std::size_t row,
                    double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double* col = coords + d * n;
    const double c = col[row];
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = c - col[j];
      out[j] = out[j] + diff * diff;
    }
  }
}

void bvn_logpdf(const double* d1, const double* d2, const double* rho, const double* inv_var,
                const double* log_norm, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = d1[i];
    const double b = d2[i];
    const double q = a * a - 2.0 * rho[i] * a * b + b * b;
    out[i] = log_norm[i] - 0.5 * inv_var[i] * q;
  }
}

double bvn_quad_sum(const double* d1, const double* d2, double rho, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = d1[i];
    const double b = d2[i];
    s += a * a - 2.0 * rho * a * b + b * b;
  }
  return s;
}

}  // namespace dpmf::simd::scalar
