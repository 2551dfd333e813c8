#pragma once

#include <array>
#include <span>

#include "dpmf/random.hpp"

namespace dpmf {

/// Ordered score pair; by convention (home, away) for games.
using ScorePair = std::array<double, 2>;

/// Shared score standard deviation and within-game correlation.
struct LikelihoodParams {
  double sigma = 10.0;
  double rho = 0.0;

  void validate() const;
};

/// Log density of the bivariate normal with mean y and covariance
/// sigma^2 [[1, rho], [rho, 1]].
double score_pair_logpdf(const ScorePair& z, const ScorePair& y, const LikelihoodParams& p);

/// z = y + A eps with A A^T the covariance above.
ScorePair sample_score_pair(const ScorePair& y, const LikelihoodParams& p, Rng& rng);

/// Sum of score_pair_logpdf over aligned (z, y) pairs, through the SIMD path.
double score_pairs_logpdf_sum(std::span<const double> z_minus_y_first,
                              std::span<const double> z_minus_y_second,
                              const LikelihoodParams& p);

class Model;
struct ModelState;

/// Conditionally independent score pairs, one bivariate density per observed
/// game in `games` (indices into model.games()).
double game_loglik(const Model& model, const ModelState& state, std::span<const std::size_t> games);

/// Over every observed game of the model.
double game_loglik(const Model& model, const ModelState& state);

}  // namespace dpmf
