#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dpmf/model.hpp"
#include "dpmf/predict.hpp"
#include "dpmf/random.hpp"
#include "dpmf/samplers.hpp"

namespace dpmf {

struct ChainSchedule {
  int n_chains = 10;
  int cold_burnin = 1000;
  int warm_burnin = 100;
  int thin = 4;
  int keep_per_chain = 100;

  void validate() const;
  std::size_t bank_size() const {
    return static_cast<std::size_t>(n_chains) * static_cast<std::size_t>(keep_per_chain);
  }
};

/// Kernel hyperparameters for all 2K feature kernels: [side][feature].
struct HyperSet {
  std::array<std::vector<HyperParams>, 2> sides;

  bool operator==(const HyperSet& o) const;
};

HyperSet hypers_of(const ModelState& state);
void apply_hypers(ModelState& state, const HyperSet& hypers);

/// Starting point for sampled hyperparameters: geometric centre of each
/// length-scale box and the largest admissible gap.
HyperSet default_hypers(const Model& model);
/// Every length scale at the top of its box (the static-PMF limit).
HyperSet pinned_hypers(const Model& model);

struct InitConfig {
  double nu_scale = 0.1;
  double rho = 0.2;
  std::optional<double> sigma;  // default: empirical score standard deviation
};

/// Fresh state: nu ~ N(0, nu_scale^2), means at the prior centres,
/// Sigma = I, sigma from the data, rho fixed.
ModelState cold_start(const Model& model, const HyperSet& hypers, const InitConfig& init, Rng& rng);

/// Carries `prev` onto `next`. Members whose new site list extends the old
/// one (by game key) keep their whitened values, which leaves the function
/// values at old sites unchanged; the appended entries are drawn from the
/// standard-normal prior. Other members restart at N(0, nu_scale^2).
ModelState warm_start(const Model& prev_model, const ModelState& prev, const Model& next_model,
                      const InitConfig& init, Rng& rng);

struct SweepConfig {
  SliceConfig mean{1.0, 32, 200};
  SliceConfig chol{0.5, 32, 200};
  SliceConfig lik{0.5, 32, 200};
  HyperSliceConfig hyper;
  bool sample_hypers = true;
};

/// A single chain: state, its private rng, and the latent cache kept in
/// sync with the state.
class Chain {
 public:
  Chain(const Model& model, ModelState state, Rng rng, SweepConfig cfg);

  /// One full sweep: ESS on every whitened function vector, slice updates
  /// of the means, the cross-covariance factors, the kernel hyperparameters
  /// (when enabled) and the likelihood parameters.
  void sweep();

  const ModelState& state() const { return state_; }
  const LatentCache& cache() const { return cache_; }
  Rng& rng() { return rng_; }
  const SweepConfig& config() const { return cfg_; }

  // Individual transition kernels, exposed for tests.
  void update_functions();
  void update_means();
  void update_mixing();
  void update_hypers();
  void update_likelihood();

 private:
  double log_posterior_terms_all() const { return cache_.loglik_all(state_); }

  const Model* model_;
  ModelState state_;
  Rng rng_;
  SweepConfig cfg_;
  LatentCache cache_;
};

/// Functional form of Chain::sweep.
ModelState sweep(const Model& model, ModelState state, Rng& rng, const SweepConfig& cfg = {});

enum class HyperMode { Sample, Frozen };

struct SampleBank {
  std::vector<std::vector<ScorePair>> means;  // [sample][fixture]
  std::vector<LikelihoodParams> lik;          // [sample]
  std::vector<HyperSet> hypers;               // [sample]

  std::size_t size() const { return lik.size(); }
  /// The equal-weight predictive mixture for one fixture.
  PredictiveMixture mixture(std::size_t fixture) const;
};

struct RunOptions {
  SweepConfig sweep;
  InitConfig init;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int threads = 1;
  /// Called after every sweep with (chain, iteration, state); runs on the
  /// chain's worker thread.
  std::function<void(int, int, const ModelState&)> observer;
};

struct BlockRun {
  SampleBank bank;
  std::vector<ModelState> final_states;  // per chain
  std::vector<Rng> final_rngs;           // per chain
};

/// Cold-starts each chain (or warm-starts from `warm`, one state per chain,
/// already carried onto `model`), burns in, then keeps keep_per_chain
/// predictive draws for `fixtures` at spacing `thin`. `hypers` is the
/// starting point (Sample) or the fixed value (Frozen).
BlockRun run_block(const Model& model, const std::vector<ModelState>* warm, std::span<const Fixture> fixtures,
                   const ChainSchedule& schedule, HyperMode mode, const HyperSet& hypers, const RunOptions& opts);

}  // namespace dpmf
