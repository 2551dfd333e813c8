#include "dpmf/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "dpmf/error.hpp"
#include "dpmf/model.hpp"
#include "dpmf/simd.hpp"

namespace dpmf {

void LikelihoodParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("likelihood: sigma must be positive");
  if (!(std::abs(rho) < 1.0)) throw DomainError("likelihood: rho must lie in (-1, 1)");
}

double score_pair_logpdf(const ScorePair& z, const ScorePair& y, const LikelihoodParams& p) {
  const double s2 = p.sigma * p.sigma;
  const double one_m_r2 = 1.0 - p.rho * p.rho;
  const double a = z[0] - y[0];
  const double b = z[1] - y[1];
  const double q = (a * a - 2.0 * p.rho * a * b + b * b) / (s2 * one_m_r2);
  return -std::log(2.0 * std::numbers::pi * s2 * std::sqrt(one_m_r2)) - 0.5 * q;
}

ScorePair sample_score_pair(const ScorePair& y, const LikelihoodParams& p, Rng& rng) {
  const double e1 = std_normal(rng);
  const double e2 = std_normal(rng);
  return {y[0] + p.sigma * e1,
          y[1] + p.sigma * (p.rho * e1 + std::sqrt(1.0 - p.rho * p.rho) * e2)};
}

double score_pairs_logpdf_sum(std::span<const double> z_minus_y_first,
                              std::span<const double> z_minus_y_second,
                              const LikelihoodParams& p) {
  return simd::bvn_logpdf_sum(z_minus_y_first, z_minus_y_second, p.sigma, p.rho);
}

double game_loglik(const Model& model, const ModelState& state, std::span<const std::size_t> games) {
  const LatentCache cache(model, state);
  return cache.loglik(state, games);
}

double game_loglik(const Model& model, const ModelState& state) {
  const LatentCache cache(model, state);
  return cache.loglik_all(state);
}

}  // namespace dpmf
