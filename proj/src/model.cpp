#include "dpmf/model.hpp"

#include <array>
#include <cmath>

#include "dpmf/error.hpp"

namespace dpmf {

namespace {
constexpr std::size_t kSmallK = 16;
}

const char* side_name(Side s) { return s == Side::U ? "U" : "V"; }

MemberSiteIndex MemberSiteIndex::build(std::span<const Game> games, std::size_t n_members) {
  MemberSiteIndex idx;
  idx.sites_.resize(n_members);
  idx.games_.resize(n_members);
  idx.members_.reserve(games.size());
  idx.positions_.reserve(games.size());
  for (std::size_t g = 0; g < games.size(); ++g) {
    const Game& game = games[g];
    if (game.home >= n_members || game.away >= n_members)
      throw IndexError("game " + std::to_string(g) + " references an unknown member");
    if (game.home == game.away)
      throw ValidationError("game " + std::to_string(g) + " pairs a member with itself");
    const std::size_t ph = idx.sites_[game.home].size();
    const std::size_t pa = idx.sites_[game.away].size();
    idx.sites_[game.home].push_back(SideInfo{game.week, 1, {}});
    idx.sites_[game.away].push_back(SideInfo{game.week, 0, {}});
    idx.games_[game.home].push_back(g);
    idx.games_[game.away].push_back(g);
    idx.members_.push_back({game.home, game.away});
    idx.positions_.push_back({ph, pa});
  }
  return idx;
}

std::size_t MemberSiteIndex::position(std::size_t game, std::size_t member) const {
  if (game >= members_.size()) throw IndexError("unknown game " + std::to_string(game));
  if (members_[game][0] == member) return positions_[game][0];
  if (members_[game][1] == member) return positions_[game][1];
  throw IndexError("member " + std::to_string(member) + " did not play game " + std::to_string(game));
}

std::array<double, 2> Priors::mean_centers(double mean_score, std::size_t K) {
  const double per_feature = std::sqrt(std::max(mean_score, 1e-6) / static_cast<double>(K));
  return {per_feature, softplus_inv(per_feature)};
}

Model::Model(std::size_t n_members, std::vector<Game> games, ModelSpec spec, Priors priors)
    : games_(std::move(games)), spec_(std::move(spec)), priors_(std::move(priors)) {
  if (spec_.K < 1) throw ConfigError("model needs at least one latent feature");
  spec_.kernel.validate(2);
  spec_.calendar.validate();
  if (priors_.length_scale_box.size() != spec_.kernel.num_length_scales())
    throw ConfigError("one prior box is required per kernel length scale");
  for (const auto& b : priors_.length_scale_box)
    if (!(b.lo > 0.0) || !(b.hi >= b.lo)) throw ConfigError("length-scale box must satisfy 0 < lo <= hi");
  if (!(priors_.gap_box.hi > priors_.gap_box.lo) || priors_.gap_box.lo < 0.0 ||
      priors_.gap_box.hi > spec_.calendar.true_gap_weeks)
    throw ConfigError("season-gap box must lie within [0, true gap]");
  for (const auto& g : games_) {
    if (!std::isfinite(g.week) || g.week < 0.0) throw ValidationError("game week must be finite and >= 0");
    if (g.observed && !(std::isfinite(g.home_score) && std::isfinite(g.away_score)))
      throw ValidationError("observed game without finite scores");
  }
  index_ = MemberSiteIndex::build(games_, n_members);
  for (std::size_t g = 0; g < games_.size(); ++g)
    if (games_[g].observed) observed_.push_back(g);
}

void Model::set_scores(std::size_t game, double home, double away) {
  auto& g = games_.at(game);
  g.home_score = home;
  g.away_score = away;
}

void ModelState::validate(const Model& model) const {
  const std::size_t K = model.K();
  const std::size_t n_ls = model.spec().kernel.num_length_scales();
  for (Side s : kSides) {
    const SideState& st = side(s);
    if (st.nu.size() != K || st.hypers.size() != K)
      throw InvalidStateError(std::string("side ") + side_name(s) + ": feature count mismatch");
    if (st.chol_sigma.rows() != static_cast<Eigen::Index>(K) || st.chol_sigma.cols() != static_cast<Eigen::Index>(K) ||
        st.mean.size() != static_cast<Eigen::Index>(K))
      throw InvalidStateError(std::string("side ") + side_name(s) + ": mixing shape mismatch");
    if (!st.chol_sigma.allFinite() || !st.mean.allFinite())
      throw InvalidStateError(std::string("side ") + side_name(s) + ": non-finite mixing state");
    for (std::size_t i = 0; i < K; ++i) {
      if (!(st.chol_sigma(i, i) > 0.0))
        throw InvalidStateError("cross-covariance Cholesky factor needs a positive diagonal");
      for (std::size_t j = i + 1; j < K; ++j)
        if (st.chol_sigma(i, j) != 0.0) throw InvalidStateError("cross-covariance factor is not lower triangular");
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (st.nu[k].size() != model.num_members())
        throw InvalidStateError("whitened functions: member count mismatch");
      for (std::size_t m = 0; m < model.num_members(); ++m) {
        if (st.nu[k][m].size() != static_cast<Eigen::Index>(model.index().sites(m).size()))
          throw InvalidStateError("whitened functions: site count mismatch for member " + std::to_string(m));
        if (!st.nu[k][m].allFinite()) throw InvalidStateError("whitened functions: non-finite entry");
      }
      const HyperParams& hp = st.hypers[k];
      if (hp.length_scales.size() != n_ls) throw InvalidStateError("hyperparameters: length-scale count mismatch");
      for (double l : hp.length_scales)
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidStateError("hyperparameters: non-positive length scale");
      if (!(hp.season_gap_weeks > 0.0) || hp.season_gap_weeks > model.spec().calendar.true_gap_weeks)
        throw InvalidStateError("hyperparameters: season gap outside (0, true gap]");
    }
  }
  try {
    lik.validate();
  } catch (const DomainError& e) {
    throw InvalidStateError(e.what());
  }
}

double softplus(double r) {
  if (r > 30.0) return r + std::log1p(std::exp(-r));
  return std::log1p(std::exp(r));
}

double softplus_inv(double y) {
  if (!(y > 0.0)) throw DomainError("softplus inverse needs a positive argument");
  if (y > 30.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

Eigen::VectorXd unwhiten(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lower) {
  if (lower.rows() != nu.size() || lower.cols() != nu.size())
    throw DomainError("unwhiten: dimension mismatch");
  return lower.triangularView<Eigen::Lower>() * nu;
}

Eigen::VectorXd whiten(const Eigen::VectorXd& f, const Eigen::MatrixXd& lower) {
  if (lower.rows() != f.size() || lower.cols() != f.size()) throw DomainError("whiten: dimension mismatch");
  return lower.triangularView<Eigen::Lower>().solve(f);
}

double inner_softplus(const Eigen::VectorXd& u, const Eigen::VectorXd& v_raw) {
  double y = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) y += u(k) * softplus(v_raw(k));
  return y;
}

LatentCache::LatentCache(const Model& model, const ModelState& state) : model_(&model) {
  refresh(state);
}

std::vector<CholeskyFactor> LatentCache::feature_chols(const ModelState& state, Side side,
                                                       std::size_t k) const {
  const auto& idx_ = model_->index();
  std::vector<CholeskyFactor> out(model_->num_members());
  const HyperParams& hp = state.side(side).hypers[k];
  for (std::size_t m = 0; m < out.size(); ++m) {
    const auto sites = idx_.sites(m);
    if (sites.empty()) continue;
    out[m] = chol_jitter(gram(sites, model_->spec().kernel, hp, model_->spec().calendar));
  }
  return out;
}

void LatentCache::refresh(const ModelState& state) {
  for (Side s : kSides) {
    chol_[idx(s)].assign(model_->K(), {});
    f_[idx(s)].assign(model_->K(), {});
    for (std::size_t k = 0; k < model_->K(); ++k) refresh_feature(state, s, k);
  }
}

void LatentCache::refresh_feature(const ModelState& state, Side side, std::size_t k) {
  auto chols = feature_chols(state, side, k);
  std::vector<Eigen::VectorXd> f(chols.size());
  const auto& nu = state.side(side).nu[k];
  for (std::size_t m = 0; m < chols.size(); ++m)
    f[m] = nu[m].size() == 0 ? Eigen::VectorXd() : unwhiten(nu[m], chols[m].lower);
  set_feature(side, k, std::move(chols), std::move(f));
}

void LatentCache::set_feature(Side side, std::size_t k, std::vector<CholeskyFactor> chols,
                              std::vector<Eigen::VectorXd> f) {
  chol_[idx(side)][k] = std::move(chols);
  f_[idx(side)][k] = std::move(f);
}

void LatentCache::set_f(Side side, std::size_t k, std::size_t member, Eigen::VectorXd f) {
  f_[idx(side)][k][member] = std::move(f);
}

Eigen::VectorXd LatentCache::latent(const ModelState& state, Side side, std::size_t member,
                                    std::size_t pos) const {
  const SideState& st = state.side(side);
  const std::size_t K = model_->K();
  Eigen::VectorXd raw(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) raw(static_cast<Eigen::Index>(k)) = f_[idx(side)][k][member](static_cast<Eigen::Index>(pos));
  return st.chol_sigma.triangularView<Eigen::Lower>() * raw + st.mean;
}

ScorePair LatentCache::y_pair(const ModelState& state, std::size_t game) const {
  const Game& g = model_->games()[game];
  const auto& index = model_->index();
  const std::size_t ph = index.position(game, g.home);
  const std::size_t pa = index.position(game, g.away);
  const std::size_t K = model_->K();
  if (K > kSmallK) {
    const Eigen::VectorXd u_home = latent(state, Side::U, g.home, ph);
    const Eigen::VectorXd u_away = latent(state, Side::U, g.away, pa);
    const Eigen::VectorXd v_home = latent(state, Side::V, g.home, ph);
    const Eigen::VectorXd v_away = latent(state, Side::V, g.away, pa);
    return {inner_softplus(u_home, v_away), inner_softplus(u_away, v_home)};
  }
  // Same arithmetic as latent(), without heap vectors.
  auto mixed = [&](Side side, std::size_t member, std::size_t pos, std::array<double, kSmallK>& out) {
    const SideState& st = state.side(side);
    std::array<double, kSmallK> raw;
    for (std::size_t k = 0; k < K; ++k) raw[k] = f_[idx(side)][k][member](static_cast<Eigen::Index>(pos));
    for (std::size_t i = 0; i < K; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= i; ++k) acc += st.chol_sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * raw[k];
      out[i] = acc + st.mean(static_cast<Eigen::Index>(i));
    }
  };
  std::array<double, kSmallK> uh, ua, vh, va;
  mixed(Side::U, g.home, ph, uh);
  mixed(Side::U, g.away, pa, ua);
  mixed(Side::V, g.home, ph, vh);
  mixed(Side::V, g.away, pa, va);
  double y_home = 0.0;
  double y_away = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    y_home += uh[k] * softplus(va[k]);
    y_away += ua[k] * softplus(vh[k]);
  }
  return {y_home, y_away};
}

double LatentCache::loglik(const ModelState& state, std::span<const std::size_t> games) const {
  std::vector<double> d1;
  std::vector<double> d2;
  d1.reserve(games.size());
  d2.reserve(games.size());
  for (std::size_t g : games) {
    const Game& game = model_->games().at(g);
    if (!game.observed) continue;
    const ScorePair y = y_pair(state, g);
    d1.push_back(game.home_score - y[0]);
    d2.push_back(game.away_score - y[1]);
  }
  if (d1.empty()) return 0.0;
  return score_pairs_logpdf_sum(d1, d2, state.lik);
}

double LatentCache::loglik_all(const ModelState& state) const {
  return loglik(state, model_->observed_games());
}

void LatentCache::residuals(const ModelState& state, std::vector<double>& d_home,
                            std::vector<double>& d_away) const {
  const auto& obs = model_->observed_games();
  d_home.resize(obs.size());
  d_away.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Game& game = model_->games()[obs[i]];
    const ScorePair y = y_pair(state, obs[i]);
    d_home[i] = game.home_score - y[0];
    d_away[i] = game.away_score - y[1];
  }
}

double LatentCache::max_jitter() const {
  double j = 0.0;
  for (const auto& side : chol_)
    for (const auto& feature : side)
      for (const auto& c : feature) j = std::max(j, c.jitter);
  return j;
}

LatentAtSites latent_vectors_at_sites(const Model& model, const ModelState& state) {
  const LatentCache cache(model, state);
  LatentAtSites out;
  for (Side s : kSides) {
    auto& per_member = out.values[idx(s)];
    per_member.resize(model.num_members());
    for (std::size_t m = 0; m < model.num_members(); ++m) {
      const std::size_t n = model.index().sites(m).size();
      per_member[m].resize(static_cast<Eigen::Index>(model.K()), static_cast<Eigen::Index>(n));
      for (std::size_t p = 0; p < n; ++p) per_member[m].col(static_cast<Eigen::Index>(p)) = cache.latent(state, s, m, p);
    }
  }
  return out;
}

double y_value(const Model& model, const ModelState& state, std::size_t game, Direction dir) {
  if (game >= model.games().size()) throw IndexError("unknown game " + std::to_string(game));
  const LatentCache cache(model, state);
  const ScorePair y = cache.y_pair(state, game);
  return dir == Direction::HomeVsAway ? y[0] : y[1];
}

}  // namespace dpmf
