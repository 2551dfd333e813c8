#include "dpmf/samplers.hpp"

#include "dpmf/model.hpp"

namespace dpmf {

double hyper_log_prior(const HyperParams& hp, const HyperPrior& prior) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (hp.length_scales.size() != prior.length_scale_box.size())
    throw DomainError("hyperparameter prior: length-scale count mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < hp.length_scales.size(); ++i) {
    const double l = hp.length_scales[i];
    if (!(l > 0.0) || !prior.length_scale_box[i].contains(l)) return kNegInf;
    lp += std::log(l);  // uniform in l seen through log l
  }
  if (prior.sample_gap) {
    const double g = hp.season_gap_weeks;
    if (!(g > prior.gap_box.lo) || g > prior.gap_box.hi) return kNegInf;
  }
  return lp;
}

std::optional<FeatureValues> feature_values(std::span<const Eigen::VectorXd> nu, double mean,
                                            std::span<const std::vector<SideInfo>> sites,
                                            const KernelSpec& spec, const HyperParams& theta,
                                            const SeasonCalendar& cal) {
  if (nu.size() != sites.size()) throw DomainError("feature_values: member count mismatch");
  FeatureValues out;
  out.chols.resize(nu.size());
  out.f.resize(nu.size());
  for (std::size_t m = 0; m < nu.size(); ++m) {
    if (sites[m].empty()) continue;
    try {
      out.chols[m] = chol_jitter(gram(sites[m], spec, theta, cal));
    } catch (const NotPositiveDefinite&) {
      return std::nullopt;
    }
    out.f[m] = unwhiten(nu[m], out.chols[m].lower);
    if (mean != 0.0) out.f[m].array() += mean;
  }
  return out;
}

HyperParams whitened_hyper_update(std::span<const Eigen::VectorXd> nu, double mean,
                                  const HyperParams& theta,
                                  std::span<const std::vector<SideInfo>> sites,
                                  const KernelSpec& spec, const SeasonCalendar& cal,
                                  const FeatureLogLik& log_lik_given_f, const HyperPrior& prior,
                                  const HyperSliceConfig& cfg, Rng& rng) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!std::isfinite(hyper_log_prior(theta, prior)))
    throw InvalidStateError("hyperparameters start outside their prior box");

  HyperParams cur = theta;
  auto density = [&](const HyperParams& hp) {
    const double lp = hyper_log_prior(hp, prior);
    if (!std::isfinite(lp)) return kNegInf;
    const auto values = feature_values(nu, mean, sites, spec, hp, cal);
    if (!values) return kNegInf;
    const double ll = log_lik_given_f(values->f);
    return std::isfinite(ll) ? lp + ll : kNegInf;
  };

  double cur_density = density(cur);
  for (std::size_t i = 0; i < cur.length_scales.size(); ++i) {
    auto at = [&](double log_l) {
      HyperParams hp = cur;
      hp.length_scales[i] = std::exp(log_l);
      return density(hp);
    };
    const auto r = slice_sample_1d(std::log(cur.length_scales[i]), at, cfg.log_length_scale, rng, cur_density);
    cur.length_scales[i] = std::exp(r.value);
    cur_density = r.log_density;
  }
  if (prior.sample_gap) {
    auto at = [&](double gap) {
      HyperParams hp = cur;
      hp.season_gap_weeks = gap;
      return density(hp);
    };
    const auto r = slice_sample_1d(cur.season_gap_weeks, at, cfg.gap, rng, cur_density);
    cur.season_gap_weeks = r.value;
  }
  return cur;
}

}  // namespace dpmf
