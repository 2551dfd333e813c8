#pragma once

// Tuning-free MCMC transition operators: univariate step-out/shrinkage slice
// sampling and elliptical slice sampling, plus the hyperparameter update that
// moves covariance parameters with the whitened latent values held fixed.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmf/error.hpp"
#include "dpmf/kernels.hpp"
#include "dpmf/random.hpp"

namespace dpmf {

struct SliceConfig {
  double initial_width = 1.0;
  int max_step_outs = 32;
  int max_shrinks = 200;

  void validate() const {
    if (!(initial_width > 0.0) || max_step_outs < 1 || max_shrinks < 1)
      throw ConfigError("slice sampler settings must be positive");
  }
};

struct SliceResult {
  double value = 0.0;
  double log_density = 0.0;
  int evaluations = 0;
  int shrinks = 0;
  double bracket_lo = 0.0;  // bracket after stepping out, before shrinking
  double bracket_hi = 0.0;
};

/// One slice-sampling update of x0 under exp(log_density) (Neal 2003, with
/// the randomly split step-out budget that keeps the update reversible).
template <typename LogDensity>
SliceResult slice_sample_1d(double x0, LogDensity&& log_density, const SliceConfig& cfg, Rng& rng,
                            std::optional<double> log_density_x0 = std::nullopt) {
  SliceResult res;
  const double f0 = log_density_x0 ? *log_density_x0 : log_density(x0);
  if (!log_density_x0) ++res.evaluations;
  if (!std::isfinite(f0)) throw InvalidStateError("slice sampler started at a point of zero density");

  const double height = f0 - exponential1(rng);
  const double w = cfg.initial_width;
  double lo = x0 - w * uniform01(rng);
  double hi = lo + w;
  int left_steps = static_cast<int>(std::floor(cfg.max_step_outs * uniform01(rng)));
  int right_steps = cfg.max_step_outs - 1 - left_steps;
  while (left_steps > 0) {
    ++res.evaluations;
    if (!(log_density(lo) > height)) break;
    lo -= w;
    --left_steps;
  }
  while (right_steps > 0) {
    ++res.evaluations;
    if (!(log_density(hi) > height)) break;
    hi += w;
    --right_steps;
  }
  res.bracket_lo = lo;
  res.bracket_hi = hi;

  for (int attempt = 0; attempt < cfg.max_shrinks; ++attempt) {
    const double x1 = lo + (hi - lo) * uniform01(rng);
    const double f1 = log_density(x1);
    ++res.evaluations;
    if (f1 > height) {
      res.value = x1;
      res.log_density = f1;
      return res;
    }
    ++res.shrinks;
    if (x1 < x0)
      lo = x1;
    else
      hi = x1;
  }
  throw SamplerError("slice sampler exhausted " + std::to_string(cfg.max_shrinks) +
                     " shrinkage steps near x = " + std::to_string(x0));
}

struct EllipticalResult {
  Eigen::VectorXd value;
  double log_lik = 0.0;
  double threshold = 0.0;
  int proposals = 0;
};

/// One elliptical slice sampling update for a posterior proportional to
/// N(f; 0, C) exp(log_lik(f)). `prior_lower` is a Cholesky factor of C;
/// nullptr means C = I. The auxiliary prior draw can be supplied through
/// `aux` (tests use this to pin the ellipse).
template <typename LogLik>
EllipticalResult elliptical_slice(const Eigen::VectorXd& f, const Eigen::MatrixXd* prior_lower,
                                  LogLik&& log_lik, Rng& rng, std::optional<double> log_lik_f = std::nullopt,
                                  const Eigen::VectorXd* aux = nullptr, int max_proposals = 100000) {
  const double cur = log_lik_f ? *log_lik_f : log_lik(f);
  if (!std::isfinite(cur)) throw InvalidStateError("elliptical slice: non-finite log likelihood at current state");

  Eigen::VectorXd nu;
  if (aux) {
    nu = *aux;
  } else {
    nu.resize(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) nu(i) = std_normal(rng);
    if (prior_lower) nu = prior_lower->triangularView<Eigen::Lower>() * nu;
  }

  EllipticalResult res;
  res.threshold = cur + std::log(uniform01(rng));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double phi = uniform(rng, 0.0, two_pi);
  double lo = phi - two_pi;
  double hi = phi;
  for (;;) {
    Eigen::VectorXd prop = f * std::cos(phi) + nu * std::sin(phi);
    const double ll = log_lik(prop);
    ++res.proposals;
    if (ll > res.threshold) {
      res.value = std::move(prop);
      res.log_lik = ll;
      return res;
    }
    if (res.proposals >= max_proposals || hi - lo < 1e-300) {
      // The bracket has collapsed onto phi = 0, which is f itself.
      res.value = f;
      res.log_lik = cur;
      return res;
    }
    if (phi > 0.0)
      hi = phi;
    else
      lo = phi;
    phi = uniform(rng, lo, hi);
  }
}

/// Top-hat prior over one kernel's hyperparameters.
struct HyperPrior {
  std::vector<Box> length_scale_box;
  bool sample_gap = false;  // true when this kernel owns its season gap
  Box gap_box{0.0, 28.0};   // lower end exclusive
};

/// Log density (up to a constant) of the top-hat prior expressed on the
/// sampling coordinates: log length scales (with the Jacobian) and the gap.
double hyper_log_prior(const HyperParams& hp, const HyperPrior& prior);

struct HyperSliceConfig {
  SliceConfig log_length_scale{1.0, 32, 200};
  SliceConfig gap{4.0, 32, 200};
};

/// Unwhitened values for every member, f = mean + L_theta nu, or nullopt when
/// some Gram matrix cannot be factored at theta.
struct FeatureValues {
  std::vector<CholeskyFactor> chols;
  std::vector<Eigen::VectorXd> f;
};
std::optional<FeatureValues> feature_values(std::span<const Eigen::VectorXd> nu, double mean,
                                            std::span<const std::vector<SideInfo>> sites,
                                            const KernelSpec& spec, const HyperParams& theta,
                                            const SeasonCalendar& cal);

using FeatureLogLik = std::function<double(const std::vector<Eigen::VectorXd>& f)>;

/// Coordinate-wise slice sampling of one kernel's hyperparameters under
/// p(theta) exp(log_lik(mean + L_theta nu)) with every nu held fixed.
/// Length scales move on the log scale, the gap on the linear scale; a
/// proposal whose Gram matrices do not factor has zero density.
HyperParams whitened_hyper_update(std::span<const Eigen::VectorXd> nu, double mean,
                                  const HyperParams& theta,
                                  std::span<const std::vector<SideInfo>> sites,
                                  const KernelSpec& spec, const SeasonCalendar& cal,
                                  const FeatureLogLik& log_lik_given_f, const HyperPrior& prior,
                                  const HyperSliceConfig& cfg, Rng& rng);

}  // namespace dpmf
