#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dpmf/kernels.hpp"
#include "dpmf/likelihood.hpp"

namespace dpmf {

/// U carries the "points for" (offense) functions, V the "points against"
/// (defense) functions passed through softplus.
enum class Side : std::size_t { U = 0, V = 1 };
inline constexpr std::array<Side, 2> kSides{Side::U, Side::V};
inline constexpr std::size_t idx(Side s) { return static_cast<std::size_t>(s); }
const char* side_name(Side s);

/// One observed (or latent-only) interaction between two members.
struct Game {
  std::size_t home = 0;
  std::size_t away = 0;
  double week = 0.0;
  double home_score = 0.0;
  double away_score = 0.0;
  bool observed = true;  // unobserved games still contribute sites
  std::size_t key = 0;   // stable identifier across training windows
};

/// Side-information sites per member: every game contributes one site to
/// each participant, in game order.
class MemberSiteIndex {
 public:
  static MemberSiteIndex build(std::span<const Game> games, std::size_t n_members);

  std::size_t num_members() const { return sites_.size(); }
  std::span<const SideInfo> sites(std::size_t member) const { return sites_.at(member); }
  std::span<const std::size_t> games_of(std::size_t member) const { return games_.at(member); }
  /// Position of `member`'s site for `game`; throws IndexError when the
  /// member did not play that game.
  std::size_t position(std::size_t game, std::size_t member) const;

 private:
  std::vector<std::vector<SideInfo>> sites_;
  std::vector<std::vector<std::size_t>> games_;
  std::vector<std::array<std::size_t, 2>> members_;    // per game: home, away
  std::vector<std::array<std::size_t, 2>> positions_;  // per game: home pos, away pos
};

/// Prior hyperparameters. Top-hat boxes are in natural units; everything
/// else is Gaussian on the stated (unconstrained) scale.
struct Priors {
  double mean_center_u = 0.0;
  double mean_center_v = 0.0;
  double mean_sd = 5.0;
  double chol_log_diag_sd = 1.5;
  double chol_offdiag_sd = 1.0;
  double log_sigma_mean = 0.0;
  double log_sigma_sd = 1.5;
  double atanh_rho_mean = 0.0;
  double atanh_rho_sd = 1.5;
  std::vector<Box> length_scale_box;  // one per kernel length scale
  Box gap_box{0.0, 28.0};             // lower end exclusive

  /// Centers that make K * center_u * softplus(center_v) equal mean_score.
  static std::array<double, 2> mean_centers(double mean_score, std::size_t K);
};

struct ModelSpec {
  std::size_t K = 1;
  KernelSpec kernel;  // same structure for all 2K feature kernels
  SeasonCalendar calendar;
  bool share_season_gap = true;
};

/// Immutable model structure plus the data it conditions on.
class Model {
 public:
  Model(std::size_t n_members, std::vector<Game> games, ModelSpec spec, Priors priors);

  std::size_t num_members() const { return index_.num_members(); }
  std::size_t K() const { return spec_.K; }
  const std::vector<Game>& games() const { return games_; }
  const std::vector<std::size_t>& observed_games() const { return observed_; }
  const MemberSiteIndex& index() const { return index_; }
  const ModelSpec& spec() const { return spec_; }
  const Priors& priors() const { return priors_; }

  /// Replaces the scores of one game (used by joint-distribution tests that
  /// resample data under a fixed structure).
  void set_scores(std::size_t game, double home, double away);

 private:
  std::vector<Game> games_;
  std::vector<std::size_t> observed_;
  MemberSiteIndex index_;
  ModelSpec spec_;
  Priors priors_;
};

struct SideState {
  std::vector<std::vector<Eigen::VectorXd>> nu;  // [feature][member], whitened
  Eigen::MatrixXd chol_sigma;                    // K x K lower, positive diagonal
  Eigen::VectorXd mean;                          // K
  std::vector<HyperParams> hypers;               // [feature]

  Eigen::MatrixXd sigma() const { return chol_sigma * chol_sigma.transpose(); }
};

/// Full Markov chain state.
struct ModelState {
  std::array<SideState, 2> sides;
  LikelihoodParams lik;
  std::uint64_t rng_seed = 0;

  SideState& side(Side s) { return sides[idx(s)]; }
  const SideState& side(Side s) const { return sides[idx(s)]; }
  double season_gap() const { return sides[0].hypers.front().season_gap_weeks; }

  /// Throws InvalidStateError when shapes disagree with `model` or values
  /// leave their supports.
  void validate(const Model& model) const;
};

double softplus(double r);
/// Inverse of softplus; requires y > 0.
double softplus_inv(double y);

/// f = L nu (the constant mean is added after mixing).
Eigen::VectorXd unwhiten(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lower);
/// nu = L^{-1} f.
Eigen::VectorXd whiten(const Eigen::VectorXd& f, const Eigen::MatrixXd& lower);

/// sum_k u_k softplus(v_raw_k)
double inner_softplus(const Eigen::VectorXd& u, const Eigen::VectorXd& v_raw);

/// Cholesky factors and unwhitened function values for every
/// (side, feature, member), plus Y evaluation on top of them. Rebuilt or
/// patched by the sampler whenever the state it mirrors changes.
class LatentCache {
 public:
  LatentCache(const Model& model, const ModelState& state);

  void refresh(const ModelState& state);
  /// Recomputes Cholesky factors and f for one feature kernel.
  void refresh_feature(const ModelState& state, Side side, std::size_t k);
  void set_feature(Side side, std::size_t k, std::vector<CholeskyFactor> chols,
                   std::vector<Eigen::VectorXd> f);
  void set_f(Side side, std::size_t k, std::size_t member, Eigen::VectorXd f);

  const CholeskyFactor& chol(Side side, std::size_t k, std::size_t member) const {
    return chol_[idx(side)][k][member];
  }
  const Eigen::VectorXd& f(Side side, std::size_t k, std::size_t member) const {
    return f_[idx(side)][k][member];
  }

  /// L_Sigma f(site) + mu for one member site (V side is pre-softplus).
  Eigen::VectorXd latent(const ModelState& state, Side side, std::size_t member,
                         std::size_t pos) const;
  /// (Y_home,away, Y_away,home) for one game.
  ScorePair y_pair(const ModelState& state, std::size_t game) const;

  /// Sum of score log densities over the observed games among `games`.
  double loglik(const ModelState& state, std::span<const std::size_t> games) const;
  double loglik_all(const ModelState& state) const;

  /// Score residuals z - y over all observed games.
  void residuals(const ModelState& state, std::vector<double>& d_home,
                 std::vector<double>& d_away) const;

  /// Largest jitter used by any cached factorization.
  double max_jitter() const;

 private:
  std::vector<CholeskyFactor> feature_chols(const ModelState& state, Side side,
                                            std::size_t k) const;

  const Model* model_;
  std::array<std::vector<std::vector<CholeskyFactor>>, 2> chol_;
  std::array<std::vector<std::vector<Eigen::VectorXd>>, 2> f_;
};

/// Per member, a K x n_sites matrix of latent vectors: u_m(x) on side U and
/// the pre-softplus v_n(x) on side V.
struct LatentAtSites {
  std::array<std::vector<Eigen::MatrixXd>, 2> values;
};

LatentAtSites latent_vectors_at_sites(const Model& model, const ModelState& state);

enum class Direction { HomeVsAway, AwayVsHome };

/// Y_{m,n}(x) = u_m(x_m)^T softplus(v_n(x_n)) for one game; HomeVsAway is the
/// home side's expected score.
double y_value(const Model& model, const ModelState& state, std::size_t game, Direction dir);

}  // namespace dpmf
