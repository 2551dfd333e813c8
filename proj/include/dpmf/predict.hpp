#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "dpmf/kernels.hpp"
#include "dpmf/likelihood.hpp"
#include "dpmf/model.hpp"
#include "dpmf/random.hpp"

namespace dpmf {

struct GpConditional {
  double mean = 0.0;
  double var = 1.0;
};

/// Noise-free conditional of a zero-mean, unit-variance GP at one test point
/// given a Cholesky factor of the training correlation matrix and the
/// correlations `k_star` between training points and the test point.
GpConditional gp_conditional(const CholeskyFactor& train_chol, const Eigen::VectorXd& f_train,
                             const Eigen::VectorXd& k_star);

/// Same, building the training factorization from the sites.
GpConditional gp_conditional(std::span<const SideInfo> train_sites, const Eigen::VectorXd& f_train,
                             const SideInfo& test_site, const KernelSpec& spec, const HyperParams& hp,
                             const SeasonCalendar& cal);

/// A game to predict: member indices plus the week it is played.
struct Fixture {
  std::size_t home = 0;
  std::size_t away = 0;
  double week = 0.0;
};

/// One draw of the predictive latent means (Y_home,away, Y_away,home) per
/// fixture: each participant's 2K feature functions are drawn from their GP
/// conditionals given that participant's own training values, then mixed,
/// softplus-transformed on the V side, and paired.
std::vector<ScorePair> draw_predictive_state(const Model& model, const ModelState& state,
                                             const LatentCache& cache, std::span<const Fixture> fixtures,
                                             Rng& rng);
std::vector<ScorePair> draw_predictive_state(const Model& model, const ModelState& state,
                                             std::span<const Fixture> fixtures, Rng& rng);

struct MixtureComponent {
  ScorePair mean{};
  LikelihoodParams lik;
};

/// Equal-weight mixture of bivariate normals over one fixture's score pair.
class PredictiveMixture {
 public:
  PredictiveMixture() = default;
  explicit PredictiveMixture(std::vector<MixtureComponent> components);

  std::size_t size() const { return components_.size(); }
  const std::vector<MixtureComponent>& components() const { return components_; }

  /// log((1/S) sum_s N(z; y_s, Sigma_s)), max-shifted.
  double logpdf(const ScorePair& z) const;
  /// Mixture probability that the first score exceeds the second.
  double prob_first_wins() const;
  ScorePair mean() const;

 private:
  std::vector<MixtureComponent> components_;
  // Column layout for the batched density kernel.
  std::vector<double> y1_, y2_, rho_, inv_var_, log_norm_;
};

double mixture_logpdf(const PredictiveMixture& mix, const ScorePair& z);

/// Standard normal CDF.
double normal_cdf(double x);

struct ExpertMetrics {
  std::size_t games = 0;
  double winner_error = 0.0;  // fraction
  double rmse = 0.0;
};

struct MetricsRow {
  std::size_t games = 0;
  double mean_log_prob = 0.0;
  double winner_error = 0.0;  // fraction
  double rmse = 0.0;          // pooled over both scores
  std::optional<ExpertMetrics> expert;
  // Sums for exact re-aggregation across blocks.
  double sum_log_prob = 0.0;
  double winner_wrong = 0.0;
  double sum_sq_error = 0.0;
};

/// Model metrics over aligned (home, away) truths; `expert` (optional,
/// aligned, entries may be missing) adds the betting-line row.
MetricsRow metrics(std::span<const PredictiveMixture> mixes, std::span<const ScorePair> truths,
                   std::span<const std::optional<ScorePair>> expert = {});

/// Expert winner error and RMSE over the games that have lines.
std::optional<ExpertMetrics> expert_metrics(std::span<const ScorePair> truths,
                                            std::span<const std::optional<ScorePair>> expert);

}  // namespace dpmf
