#include "dpmf/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dpmf/error.hpp"
#include "dpmf/simd.hpp"

namespace dpmf {

GpConditional gp_conditional(const CholeskyFactor& train_chol, const Eigen::VectorXd& f_train,
                             const Eigen::VectorXd& k_star) {
  if (f_train.size() == 0) return {0.0, 1.0};
  if (train_chol.lower.rows() != f_train.size() || k_star.size() != f_train.size())
    throw DomainError("gp_conditional: dimension mismatch");
  const auto L = train_chol.lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd a = L.solve(k_star);
  const Eigen::VectorXd b = L.solve(f_train);
  const double var = 1.0 - a.squaredNorm();
  return {a.dot(b), std::clamp(var, 0.0, 1.0)};
}

GpConditional gp_conditional(std::span<const SideInfo> train_sites, const Eigen::VectorXd& f_train,
                             const SideInfo& test_site, const KernelSpec& spec, const HyperParams& hp,
                             const SeasonCalendar& cal) {
  if (train_sites.empty()) return {0.0, 1.0};
  const auto chol = chol_jitter(gram(train_sites, spec, hp, cal));
  return gp_conditional(chol, f_train, cross_corr(train_sites, test_site, spec, hp, cal));
}

std::vector<ScorePair> draw_predictive_state(const Model& model, const ModelState& state,
                                             const LatentCache& cache, std::span<const Fixture> fixtures,
                                             Rng& rng) {
  const std::size_t K = model.K();
  const auto& spec = model.spec();
  std::vector<ScorePair> out;
  out.reserve(fixtures.size());
  for (const Fixture& fx : fixtures) {
    if (fx.home >= model.num_members() || fx.away >= model.num_members())
      throw IndexError("fixture references an unknown member");
    // latent[side][participant], participant 0 = home, 1 = away
    std::array<std::array<Eigen::VectorXd, 2>, 2> latent;
    for (Side side : kSides) {
      const SideState& st = state.side(side);
      for (std::size_t p = 0; p < 2; ++p) {
        const std::size_t member = p == 0 ? fx.home : fx.away;
        const SideInfo site{fx.week, p == 0 ? 1 : 0, {}};
        const auto sites = model.index().sites(member);
        Eigen::VectorXd raw(static_cast<Eigen::Index>(K));
        for (std::size_t k = 0; k < K; ++k) {
          GpConditional c;
          if (!sites.empty()) {
            const Eigen::VectorXd k_star = cross_corr(sites, site, spec.kernel, st.hypers[k], spec.calendar);
            c = gp_conditional(cache.chol(side, k, member), cache.f(side, k, member), k_star);
          }
          raw(static_cast<Eigen::Index>(k)) = c.mean + std::sqrt(c.var) * std_normal(rng);
        }
        latent[idx(side)][p] = st.chol_sigma.triangularView<Eigen::Lower>() * raw + st.mean;
      }
    }
    out.push_back({inner_softplus(latent[0][0], latent[1][1]), inner_softplus(latent[0][1], latent[1][0])});
  }
  return out;
}

std::vector<ScorePair> draw_predictive_state(const Model& model, const ModelState& state,
                                             std::span<const Fixture> fixtures, Rng& rng) {
  const LatentCache cache(model, state);
  return draw_predictive_state(model, state, cache, fixtures, rng);
}

PredictiveMixture::PredictiveMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("predictive mixture needs at least one component");
  const std::size_t n = components_.size();
  y1_.resize(n);
  y2_.resize(n);
  rho_.resize(n);
  inv_var_.resize(n);
  log_norm_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& c = components_[s];
    c.lik.validate();
    const double s2 = c.lik.sigma * c.lik.sigma;
    const double one_m_r2 = 1.0 - c.lik.rho * c.lik.rho;
    y1_[s] = c.mean[0];
    y2_[s] = c.mean[1];
    rho_[s] = c.lik.rho;
    inv_var_[s] = 1.0 / (s2 * one_m_r2);
    log_norm_[s] = -std::log(2.0 * std::numbers::pi * s2 * std::sqrt(one_m_r2));
  }
}

double PredictiveMixture::logpdf(const ScorePair& z) const {
  const std::size_t n = components_.size();
  std::vector<double> d1(n), d2(n), lp(n);
  for (std::size_t s = 0; s < n; ++s) {
    d1[s] = z[0] - y1_[s];
    d2[s] = z[1] - y2_[s];
  }
  simd::bvn_logpdf(d1, d2, rho_, inv_var_, log_norm_, lp);
  const double mx = *std::max_element(lp.begin(), lp.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : lp) acc += std::exp(v - mx);
  return mx + std::log(acc / static_cast<double>(n));
}

double PredictiveMixture::prob_first_wins() const {
  double p = 0.0;
  for (const auto& c : components_) {
    const double sd = std::sqrt(2.0 * c.lik.sigma * c.lik.sigma * (1.0 - c.lik.rho));
    p += normal_cdf((c.mean[0] - c.mean[1]) / sd);
  }
  return p / static_cast<double>(components_.size());
}

ScorePair PredictiveMixture::mean() const {
  ScorePair m{0.0, 0.0};
  for (const auto& c : components_) {
    m[0] += c.mean[0];
    m[1] += c.mean[1];
  }
  const double n = static_cast<double>(components_.size());
  return {m[0] / n, m[1] / n};
}

double mixture_logpdf(const PredictiveMixture& mix, const ScorePair& z) { return mix.logpdf(z); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::optional<ExpertMetrics> expert_metrics(std::span<const ScorePair> truths,
                                            std::span<const std::optional<ScorePair>> expert) {
  if (expert.empty()) return std::nullopt;
  if (expert.size() != truths.size()) throw DomainError("expert predictions not aligned with truths");
  ExpertMetrics em;
  double wrong = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!expert[i]) continue;
    const auto& e = *expert[i];
    const bool predict_home = e[0] >= e[1];
    const bool home_won = truths[i][0] > truths[i][1];
    wrong += predict_home != home_won ? 1.0 : 0.0;
    sq += (e[0] - truths[i][0]) * (e[0] - truths[i][0]) + (e[1] - truths[i][1]) * (e[1] - truths[i][1]);
    ++em.games;
  }
  if (em.games == 0) return std::nullopt;
  em.winner_error = wrong / static_cast<double>(em.games);
  em.rmse = std::sqrt(sq / (2.0 * static_cast<double>(em.games)));
  return em;
}

MetricsRow metrics(std::span<const PredictiveMixture> mixes, std::span<const ScorePair> truths,
                   std::span<const std::optional<ScorePair>> expert) {
  if (mixes.size() != truths.size()) throw DomainError("metrics: mixtures and truths differ in length");
  MetricsRow row;
  row.games = mixes.size();
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    row.sum_log_prob += mixes[i].logpdf(truths[i]);
    const bool predict_home = mixes[i].prob_first_wins() > 0.5;
    const bool home_won = truths[i][0] > truths[i][1];
    row.winner_wrong += predict_home != home_won ? 1.0 : 0.0;
    const ScorePair m = mixes[i].mean();
    row.sum_sq_error += (m[0] - truths[i][0]) * (m[0] - truths[i][0]) + (m[1] - truths[i][1]) * (m[1] - truths[i][1]);
  }
  if (row.games > 0) {
    const double g = static_cast<double>(row.games);
    row.mean_log_prob = row.sum_log_prob / g;
    row.winner_error = row.winner_wrong / g;
    row.rmse = std::sqrt(row.sum_sq_error / (2.0 * g));
  }
  row.expert = expert_metrics(truths, expert);
  return row;
}

}  // namespace dpmf
