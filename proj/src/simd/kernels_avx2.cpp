#include <immintrin.h>

#include "dpmf/simd.hpp"

// Multiplies and adds are kept separate (no FMA contraction) so the lane-wise
// results of the elementwise kernels match the scalar path bit for bit.

namespace dpmf::simd::avx2 {

void ard_sqdist_row(const double* coords, std::size_t dims, std::size_t n, std::size_t row,
                    double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out + j, _mm256_setzero_pd());
  for (; j < n; ++j) out[j] = 0.0;

  for (std::size_t d = 0; d < dims; ++d) {
    const double* col = coords + d * n;
    const double c = col[row];
    const __m256d vc = _mm256_set1_pd(c);
    j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d diff = _mm256_sub_pd(vc, _mm256_loadu_pd(col + j));
      const __m256d acc = _mm256_loadu_pd(out + j);
      _mm256_storeu_pd(out + j, _mm256_add_pd(acc, _mm256_mul_pd(diff, diff)));
    }
    for (; j < n; ++j) {
      const double diff = c - col[j];
      out[j] = out[j] + diff * diff;
    }
  }
}

void bvn_logpdf(const double* d1, const double* d2, const double* rho, const double* inv_var,
                const double* log_norm, std::size_t n, double* out) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(d1 + i);
    const __m256d b = _mm256_loadu_pd(d2 + i);
    const __m256d r = _mm256_loadu_pd(rho + i);
    // a*a - 2*r*a*b + b*b, evaluated left to right as in the scalar loop
    const __m256d cross = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(two, r), a), b);
    const __m256d q = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(a, a), cross), _mm256_mul_pd(b, b));
    const __m256d scaled = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_loadu_pd(inv_var + i)), q);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(log_norm + i), scaled));
  }
  for (; i < n; ++i) {
    const double a = d1[i];
    const double b = d2[i];
    const double q = a * a - 2.0 * rho[i] * a * b + b * b;
    out[i] = log_norm[i] - 0.5 * inv_var[i] * q;
  }
}

double bvn_quad_sum(const double* d1, const double* d2, double rho, std::size_t n) {
  const __m256d two_rho = _mm256_set1_pd(2.0 * rho);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(d1 + i);
    const __m256d b = _mm256_loadu_pd(d2 + i);
    const __m256d cross = _mm256_mul_pd(_mm256_mul_pd(two_rho, a), b);
    const __m256d q = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(a, a), cross), _mm256_mul_pd(b, b));
    acc = _mm256_add_pd(acc, q);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double a = d1[i];
    const double b = d2[i];
    s += a * a - 2.0 * rho * a * b + b * b;
  }
  return s;
}

}  // namespace dpmf::simd::avx2
