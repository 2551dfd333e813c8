#include "dpmf/driver.hpp"

#include <cmath>
#include <future>
#include <limits>

#include "dpmf/error.hpp"

namespace dpmf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd);
}

Eigen::VectorXd normal_vector(Eigen::Index n, double scale, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * std_normal(rng);
  return v;
}

}  // namespace

void ChainSchedule::validate() const {
  if (n_chains < 1 || cold_burnin < 0 || warm_burnin < 0 || thin < 1 || keep_per_chain < 1)
    throw ConfigError("chain schedule: chains, thin and keep must be >= 1 and burn-in >= 0");
}

bool HyperSet::operator==(const HyperSet& o) const {
  for (std::size_t s = 0; s < 2; ++s) {
    if (sides[s].size() != o.sides[s].size()) return false;
    for (std::size_t k = 0; k < sides[s].size(); ++k)
      if (sides[s][k].length_scales != o.sides[s][k].length_scales ||
          sides[s][k].season_gap_weeks != o.sides[s][k].season_gap_weeks)
        return false;
  }
  return true;
}

HyperSet hypers_of(const ModelState& state) {
  HyperSet h;
  for (Side s : kSides) h.sides[idx(s)] = state.side(s).hypers;
  return h;
}

void apply_hypers(ModelState& state, const HyperSet& hypers) {
  for (Side s : kSides) state.side(s).hypers = hypers.sides[idx(s)];
}

HyperSet default_hypers(const Model& model) {
  HyperParams hp;
  for (const auto& b : model.priors().length_scale_box) hp.length_scales.push_back(std::sqrt(b.lo * b.hi));
  hp.season_gap_weeks = model.priors().gap_box.hi;
  HyperSet h;
  for (Side s : kSides) h.sides[idx(s)].assign(model.K(), hp);
  return h;
}

HyperSet pinned_hypers(const Model& model) {
  HyperParams hp;
  for (const auto& b : model.priors().length_scale_box) hp.length_scales.push_back(b.hi);
  hp.season_gap_weeks = model.priors().gap_box.hi;
  HyperSet h;
  for (Side s : kSides) h.sides[idx(s)].assign(model.K(), hp);
  return h;
}

ModelState cold_start(const Model& model, const HyperSet& hypers, const InitConfig& init, Rng& rng) {
  const std::size_t K = model.K();
  const auto Ki = static_cast<Eigen::Index>(K);
  ModelState st;
  for (Side s : kSides) {
    SideState& side = st.side(s);
    side.nu.assign(K, std::vector<Eigen::VectorXd>(model.num_members()));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < model.num_members(); ++m)
        side.nu[k][m] = normal_vector(static_cast<Eigen::Index>(model.index().sites(m).size()), init.nu_scale, rng);
    side.chol_sigma = Eigen::MatrixXd::Identity(Ki, Ki);
    const double center = s == Side::U ? model.priors().mean_center_u : model.priors().mean_center_v;
    side.mean = Eigen::VectorXd::Constant(Ki, center);
    side.hypers = hypers.sides[idx(s)];
  }
  double sigma = 10.0;
  if (init.sigma) {
    sigma = *init.sigma;
  } else {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t g : model.observed_games()) {
      for (double z : {model.games()[g].home_score, model.games()[g].away_score}) {
        sum += z;
        sq += z * z;
        ++n;
      }
    }
    if (n > 1) {
      const double mean = sum / static_cast<double>(n);
      const double var = (sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
      if (var > 1e-12) sigma = std::sqrt(var);
    }
  }
  st.lik = {sigma, init.rho};
  st.validate(model);
  return st;
}

ModelState warm_start(const Model& prev_model, const ModelState& prev, const Model& next_model,
                      const InitConfig& init, Rng& rng) {
  if (prev_model.K() != next_model.K() || prev_model.num_members() != next_model.num_members())
    throw ConfigError("warm start across models with different shapes");
  ModelState st = prev;
  for (std::size_t m = 0; m < next_model.num_members(); ++m) {
    const auto old_games = prev_model.index().games_of(m);
    const auto new_games = next_model.index().games_of(m);
    bool prefix = old_games.size() <= new_games.size();
    for (std::size_t i = 0; prefix && i < old_games.size(); ++i)
      prefix = prev_model.games()[old_games[i]].key == next_model.games()[new_games[i]].key;
    const auto n_new = static_cast<Eigen::Index>(new_games.size());
    const auto n_old = static_cast<Eigen::Index>(old_games.size());
    for (Side s : kSides) {
      for (std::size_t k = 0; k < next_model.K(); ++k) {
        Eigen::VectorXd& nu = st.side(s).nu[k][m];
        if (prefix) {
          Eigen::VectorXd grown(n_new);
          grown.head(n_old) = prev.side(s).nu[k][m];
          grown.tail(n_new - n_old) = normal_vector(n_new - n_old, 1.0, rng);
          nu = std::move(grown);
        } else {
          nu = normal_vector(n_new, init.nu_scale, rng);
        }
      }
    }
  }
  st.validate(next_model);
  return st;
}

Chain::Chain(const Model& model, ModelState state, Rng rng, SweepConfig cfg)
    : model_(&model), state_(std::move(state)), rng_(std::move(rng)), cfg_(std::move(cfg)), cache_(model, state_) {
  state_.validate(model);
}

void Chain::sweep() {
  update_functions();
  update_means();
  update_mixing();
  if (cfg_.sample_hypers) update_hypers();
  update_likelihood();
}

void Chain::update_functions() {
  const auto& index = model_->index();
  for (Side side : kSides) {
    for (std::size_t k = 0; k < model_->K(); ++k) {
      for (std::size_t m = 0; m < model_->num_members(); ++m) {
        const auto games = index.games_of(m);
        if (games.empty()) continue;
        const Eigen::MatrixXd& L = cache_.chol(side, k, m).lower;
        auto log_lik = [&](const Eigen::VectorXd& nu) {
          cache_.set_f(side, k, m, unwhiten(nu, L));
          return cache_.loglik(state_, games);
        };
        const double current = cache_.loglik(state_, games);
        auto res = elliptical_slice(state_.side(side).nu[k][m], nullptr, log_lik, rng_, current);
        cache_.set_f(side, k, m, unwhiten(res.value, L));
        state_.side(side).nu[k][m] = std::move(res.value);
      }
    }
  }
}

void Chain::update_means() {
  const Priors& pr = model_->priors();
  for (Side side : kSides) {
    const double center = side == Side::U ? pr.mean_center_u : pr.mean_center_v;
    for (std::size_t k = 0; k < model_->K(); ++k) {
      double& slot = state_.side(side).mean(static_cast<Eigen::Index>(k));
      auto density = [&](double x) {
        slot = x;
        return normal_logpdf(x, center, pr.mean_sd) + cache_.loglik_all(state_);
      };
      const double x0 = slot;
      const double d0 = density(x0);
      const auto r = slice_sample_1d(x0, density, cfg_.mean, rng_, d0);
      slot = r.value;
    }
  }
}

void Chain::update_mixing() {
  const Priors& pr = model_->priors();
  for (Side side : kSides) {
    Eigen::MatrixXd& L = state_.side(side).chol_sigma;
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const bool diag = i == j;
        auto density = [&](double x) {
          L(i, j) = diag ? std::exp(x) : x;
          const double prior = diag ? normal_logpdf(x, 0.0, pr.chol_log_diag_sd) : normal_logpdf(x, 0.0, pr.chol_offdiag_sd);
          return prior + cache_.loglik_all(state_);
        };
        const double x0 = diag ? std::log(L(i, j)) : L(i, j);
        const double d0 = density(x0);
        const auto r = slice_sample_1d(x0, density, cfg_.chol, rng_, d0);
        L(i, j) = diag ? std::exp(r.value) : r.value;
      }
    }
  }
}

void Chain::update_hypers() {
  const auto& spec = model_->spec();
  const Priors& pr = model_->priors();
  const auto& index = model_->index();
  std::vector<std::vector<SideInfo>> sites(model_->num_members());
  for (std::size_t m = 0; m < sites.size(); ++m) {
    const auto s = index.sites(m);
    sites[m].assign(s.begin(), s.end());
  }

  HyperPrior prior;
  prior.length_scale_box = pr.length_scale_box;
  prior.sample_gap = !spec.share_season_gap && spec.kernel.uses_dim(kTimeDim);
  prior.gap_box = pr.gap_box;

  for (Side side : kSides) {
    for (std::size_t k = 0; k < model_->K(); ++k) {
      auto& nu = state_.side(side).nu[k];
      std::vector<Eigen::VectorXd> saved(model_->num_members());
      for (std::size_t m = 0; m < saved.size(); ++m) saved[m] = cache_.f(side, k, m);
      FeatureLogLik ll = [&](const std::vector<Eigen::VectorXd>& f) {
        for (std::size_t m = 0; m < f.size(); ++m) cache_.set_f(side, k, m, f[m]);
        const double v = cache_.loglik_all(state_);
        for (std::size_t m = 0; m < f.size(); ++m) cache_.set_f(side, k, m, saved[m]);
        return v;
      };
      state_.side(side).hypers[k] = whitened_hyper_update(nu, 0.0, state_.side(side).hypers[k], sites, spec.kernel,
                                                          spec.calendar, ll, prior, cfg_.hyper, rng_);
      cache_.refresh_feature(state_, side, k);
    }
  }

  if (!spec.share_season_gap || !spec.kernel.uses_dim(kTimeDim)) return;

  // One gap shared by all 2K kernels: every feature's f moves with it.
  auto with_gap = [&](double gap) {
    for (Side side : kSides)
      for (auto& hp : state_.side(side).hypers) hp.season_gap_weeks = gap;
  };
  auto density = [&](double gap) {
    if (!(gap > pr.gap_box.lo) || gap > pr.gap_box.hi) return kNegInf;
    const double old_gap = state_.season_gap();
    with_gap(gap);
    std::array<std::vector<std::vector<Eigen::VectorXd>>, 2> saved;
    bool ok = true;
    for (Side side : kSides) {
      saved[idx(side)].resize(model_->K());
      for (std::size_t k = 0; k < model_->K() && ok; ++k) {
        for (std::size_t m = 0; m < model_->num_members(); ++m) saved[idx(side)][k].push_back(cache_.f(side, k, m));
        auto values = feature_values(state_.side(side).nu[k], 0.0, sites, spec.kernel, state_.side(side).hypers[k],
                                     spec.calendar);
        if (!values) {
          ok = false;
          break;
        }
        for (std::size_t m = 0; m < values->f.size(); ++m) cache_.set_f(side, k, m, std::move(values->f[m]));
      }
    }
    const double v = ok ? cache_.loglik_all(state_) : kNegInf;
    for (Side side : kSides)
      for (std::size_t k = 0; k < saved[idx(side)].size(); ++k)
        for (std::size_t m = 0; m < saved[idx(side)][k].size(); ++m) cache_.set_f(side, k, m, saved[idx(side)][k][m]);
    with_gap(old_gap);
    return v;
  };
  const double g0 = state_.season_gap();
  const auto r = slice_sample_1d(g0, density, cfg_.hyper.gap, rng_);
  with_gap(r.value);
  for (Side side : kSides)
    for (std::size_t k = 0; k < model_->K(); ++k) cache_.refresh_feature(state_, side, k);
}

void Chain::update_likelihood() {
  const Priors& pr = model_->priors();
  std::vector<double> d1;
  std::vector<double> d2;
  cache_.residuals(state_, d1, d2);
  auto lik_sum = [&](const LikelihoodParams& p) {
    return d1.empty() ? 0.0 : score_pairs_logpdf_sum(d1, d2, p);
  };

  auto sigma_density = [&](double log_sigma) {
    LikelihoodParams p{std::exp(log_sigma), state_.lik.rho};
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) return kNegInf;
    return normal_logpdf(log_sigma, pr.log_sigma_mean, pr.log_sigma_sd) + lik_sum(p);
  };
  state_.lik.sigma = std::exp(slice_sample_1d(std::log(state_.lik.sigma), sigma_density, cfg_.lik, rng_).value);

  auto rho_density = [&](double a) {
    LikelihoodParams p{state_.lik.sigma, std::tanh(a)};
    if (!(std::abs(p.rho) < 1.0)) return kNegInf;
    return normal_logpdf(a, pr.atanh_rho_mean, pr.atanh_rho_sd) + lik_sum(p);
  };
  state_.lik.rho = std::tanh(slice_sample_1d(std::atanh(state_.lik.rho), rho_density, cfg_.lik, rng_).value);
}

ModelState sweep(const Model& model, ModelState state, Rng& rng, const SweepConfig& cfg) {
  Chain chain(model, std::move(state), rng, cfg);
  chain.sweep();
  rng = chain.rng();
  return chain.state();
}

PredictiveMixture SampleBank::mixture(std::size_t fixture) const {
  std::vector<MixtureComponent> comps;
  comps.reserve(size());
  for (std::size_t s = 0; s < size(); ++s) comps.push_back({means[s].at(fixture), lik[s]});
  return PredictiveMixture(std::move(comps));
}

namespace {

struct ChainOutput {
  SampleBank bank;
  ModelState final_state;
  Rng final_rng;
};

ChainOutput run_chain(const Model& model, const std::vector<ModelState>* warm, std::span<const Fixture> fixtures,
                      const ChainSchedule& schedule, HyperMode mode, const HyperSet& hypers, const RunOptions& opts,
                      int chain_index) {
  Rng rng = make_chain_rng(opts.seed, static_cast<std::uint64_t>(chain_index), opts.stream);
  ModelState state = warm ? (*warm)[static_cast<std::size_t>(chain_index)] : cold_start(model, hypers, opts.init, rng);
  if (mode == HyperMode::Frozen) apply_hypers(state, hypers);
  state.rng_seed = opts.seed;

  SweepConfig cfg = opts.sweep;
  if (mode == HyperMode::Frozen) cfg.sample_hypers = false;
  Chain chain(model, std::move(state), std::move(rng), cfg);

  int iteration = 0;
  auto step = [&] {
    chain.sweep();
    if (opts.observer) opts.observer(chain_index, iteration, chain.state());
    ++iteration;
  };
  const int burn = warm ? schedule.warm_burnin : schedule.cold_burnin;
  for (int i = 0; i < burn; ++i) step();

  ChainOutput out;
  for (int s = 0; s < schedule.keep_per_chain; ++s) {
    for (int t = 0; t < schedule.thin; ++t) step();
    out.bank.means.push_back(draw_predictive_state(model, chain.state(), chain.cache(), fixtures, chain.rng()));
    out.bank.lik.push_back(chain.state().lik);
    out.bank.hypers.push_back(hypers_of(chain.state()));
  }
  out.final_state = chain.state();
  out.final_rng = chain.rng();
  return out;
}

}  // namespace

BlockRun run_block(const Model& model, const std::vector<ModelState>* warm, std::span<const Fixture> fixtures,
                   const ChainSchedule& schedule, HyperMode mode, const HyperSet& hypers, const RunOptions& opts) {
  schedule.validate();
  if (model.observed_games().empty() && model.games().empty())
    throw ConfigError("no training data for this run");
  if (warm && warm->size() != static_cast<std::size_t>(schedule.n_chains))
    throw ConfigError("warm start needs one state per chain");

  std::vector<ChainOutput> outputs(static_cast<std::size_t>(schedule.n_chains));
  const int threads = std::max(1, opts.threads);
  for (int first = 0; first < schedule.n_chains; first += threads) {
    const int last = std::min(schedule.n_chains, first + threads);
    if (last - first == 1) {
      outputs[static_cast<std::size_t>(first)] = run_chain(model, warm, fixtures, schedule, mode, hypers, opts, first);
      continue;
    }
    std::vector<std::future<ChainOutput>> pending;
    for (int c = first; c < last; ++c)
      pending.push_back(std::async(std::launch::async, run_chain, std::cref(model), warm, fixtures,
                                   std::cref(schedule), mode, std::cref(hypers), std::cref(opts), c));
    for (int c = first; c < last; ++c) outputs[static_cast<std::size_t>(c)] = pending[static_cast<std::size_t>(c - first)].get();
  }

  BlockRun run;
  for (auto& out : outputs) {
    for (std::size_t s = 0; s < out.bank.size(); ++s) {
      run.bank.means.push_back(std::move(out.bank.means[s]));
      run.bank.lik.push_back(out.bank.lik[s]);
      run.bank.hypers.push_back(std::move(out.bank.hypers[s]));
    }
    run.final_states.push_back(std::move(out.final_state));
    run.final_rngs.push_back(std::move(out.final_rng));
  }
  return run;
}

}  // namespace dpmf
