#include <cmath>

#include "dpmf/data.hpp"
#include "dpmf/error.hpp"

namespace dpmf {
namespace {

// Circle-method single round robin: rounds[r] lists (a, b) pairings.
std::vector<std::vector<std::array<std::size_t, 2>>> round_robin(std::size_t n_teams) {
  const std::size_t n = n_teams % 2 == 0 ? n_teams : n_teams + 1;  // n - 1 is a bye when odd
  std::vector<std::size_t> ring(n);
  for (std::size_t i = 0; i < n; ++i) ring[i] = i;
  std::vector<std::vector<std::array<std::size_t, 2>>> rounds;
  for (std::size_t r = 0; r + 1 < n; ++r) {
    std::vector<std::array<std::size_t, 2>> pairs;
    for (std::size_t i = 0; i < n / 2; ++i) {
      std::size_t a = ring[i];
      std::size_t b = ring[n - 1 - i];
      if (a >= n_teams || b >= n_teams) continue;
      if ((r + i) % 2 == 1) std::swap(a, b);
      pairs.push_back({a, b});
    }
    rounds.push_back(std::move(pairs));
    std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
  }
  return rounds;
}

std::string team_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "T%02zu", i);
  return buf;
}

double round_half(double v) { return std::round(v * 2.0) / 2.0; }

}  // namespace

SynthResult synth_generate(SynthConfig cfg) {
  if (cfg.K < 1 || cfg.n_teams < 2 || cfg.n_seasons < 1 || !(cfg.season_weeks > 0.0))
    throw ConfigError("synthetic config: need K >= 1, >= 2 teams, >= 1 season, positive season length");
  cfg.kernel.validate(2);
  const std::size_t K = cfg.K;
  const auto n_ls = cfg.kernel.num_length_scales();
  auto default_hypers = [&](double time_ls, double home_ls) {
    HyperParams hp;
    for (int d : cfg.kernel.length_scale_dims()) hp.length_scales.push_back(d == kTimeDim ? time_ls : home_ls);
    hp.season_gap_weeks = std::min(8.0, cfg.true_gap_weeks);
    return std::vector<HyperParams>(K, hp);
  };
  if (cfg.hypers_u.empty()) cfg.hypers_u = default_hypers(12.0, 0.7);
  if (cfg.hypers_v.empty()) cfg.hypers_v = default_hypers(16.0, 1.0);
  if (cfg.hypers_u.size() != K || cfg.hypers_v.size() != K) throw ConfigError("synthetic config: one hyper set per feature");
  for (const auto* hs : {&cfg.hypers_u, &cfg.hypers_v})
    for (const auto& hp : *hs)
      if (hp.length_scales.size() != n_ls) throw ConfigError("synthetic config: length-scale count mismatch");
  if (cfg.chol_sigma_u.size() == 0) cfg.chol_sigma_u = Eigen::MatrixXd::Identity(K, K);
  if (cfg.chol_sigma_v.size() == 0) cfg.chol_sigma_v = Eigen::MatrixXd::Identity(K, K);
  const auto centers = Priors::mean_centers(cfg.mean_score, K);
  if (cfg.mean_u.size() == 0) cfg.mean_u = Eigen::VectorXd::Constant(K, centers[0]);
  if (cfg.mean_v.size() == 0) cfg.mean_v = Eigen::VectorXd::Constant(K, centers[1]);
  LikelihoodParams lik{cfg.sigma, cfg.rho};
  lik.validate();

  Rng rng = make_chain_rng(cfg.seed, 0);
  const Date start = parse_date(cfg.start_date);
  const auto rounds = round_robin(cfg.n_teams);
  const std::size_t per_season = 2 * rounds.size();
  const double season_stride = cfg.season_weeks + cfg.true_gap_weeks;

  SynthResult out;
  for (int s = 0; s < cfg.n_seasons; ++s) {
    const double season_start = season_stride * s;
    for (std::size_t r = 0; r < per_season; ++r) {
      const double week = season_start + cfg.season_weeks * static_cast<double>(r) / static_cast<double>(per_season);
      const auto days = static_cast<long>(std::floor(week * 7.0));
      for (const auto& pair : rounds[r % rounds.size()]) {
        GameRecord g;
        g.date = start + std::chrono::days(days);
        g.season = s + 1;
        const bool swap = r >= rounds.size();
        g.home_team = team_name(swap ? pair[1] : pair[0]);
        g.away_team = team_name(swap ? pair[0] : pair[1]);
        out.games.push_back(std::move(g));
      }
    }
    if (s + 1 < cfg.n_seasons)
      out.calendar.boundaries.push_back({season_start + cfg.season_weeks, season_stride * (s + 1)});
  }
  out.calendar.true_gap_weeks = cfg.true_gap_weeks;
  std::stable_sort(out.games.begin(), out.games.end(), [](const GameRecord& a, const GameRecord& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.home_team != b.home_team) return a.home_team < b.home_team;
    return a.away_team < b.away_team;
  });
  assign_weeks(out.games, start);

  // Latent functions per team at its own sites, from the 2K Gaussian processes.
  const auto teams = team_table(out.games);
  std::vector<std::size_t> keys(out.games.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i;
  const auto model_games = to_model_games(out.games, teams, keys);
  const auto index = MemberSiteIndex::build(model_games, teams.size());

  std::array<std::vector<Eigen::MatrixXd>, 2> raw;  // [side][team] K x n
  for (Side side : kSides) {
    const auto& hypers = side == Side::U ? cfg.hypers_u : cfg.hypers_v;
    raw[idx(side)].resize(teams.size());
    for (std::size_t t = 0; t < teams.size(); ++t) {
      const auto sites = index.sites(t);
      raw[idx(side)][t].resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(sites.size()));
      for (std::size_t k = 0; k < K; ++k) {
        const auto chol = chol_jitter(gram(sites, cfg.kernel, hypers[k], out.calendar));
        Eigen::VectorXd z(static_cast<Eigen::Index>(sites.size()));
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std_normal(rng);
        raw[idx(side)][t].row(static_cast<Eigen::Index>(k)) = unwhiten(z, chol.lower).transpose();
      }
    }
  }

  auto mixed = [&](Side side, std::size_t team, std::size_t pos) -> Eigen::VectorXd {
    const Eigen::MatrixXd& L = side == Side::U ? cfg.chol_sigma_u : cfg.chol_sigma_v;
    const Eigen::VectorXd& mu = side == Side::U ? cfg.mean_u : cfg.mean_v;
    return L.triangularView<Eigen::Lower>() * raw[idx(side)][team].col(static_cast<Eigen::Index>(pos)) + mu;
  };

  for (std::size_t g = 0; g < out.games.size(); ++g) {
    const Game& mg = model_games[g];
    const std::size_t ph = index.position(g, mg.home);
    const std::size_t pa = index.position(g, mg.away);
    const ScorePair y{inner_softplus(mixed(Side::U, mg.home, ph), mixed(Side::V, mg.away, pa)),
                      inner_softplus(mixed(Side::U, mg.away, pa), mixed(Side::V, mg.home, ph))};
    const ScorePair z = sample_score_pair(y, lik, rng);
    auto& rec = out.games[g];
    rec.home_score = std::max(0.0, z[0]);
    rec.away_score = std::max(0.0, z[1]);
    if (cfg.with_lines) {
      rec.home_spread = round_half(-(y[0] - y[1]) + cfg.line_noise * std_normal(rng));
      rec.over_under = round_half(y[0] + y[1] + cfg.line_noise * std_normal(rng));
    }
    out.expected.push_back(y);
  }

  for (std::size_t t = 0; t < teams.size(); ++t) {
    const auto sites = index.sites(t);
    const auto games_of = index.games_of(t);
    for (std::size_t p = 0; p < sites.size(); ++p) {
      SynthSiteTruth st;
      st.team = teams[t];
      st.game = games_of[p];
      st.week = sites[p].raw_week;
      st.is_home = sites[p].is_home;
      const Eigen::VectorXd u = mixed(Side::U, t, p);
      const Eigen::VectorXd v = mixed(Side::V, t, p);
      for (std::size_t k = 0; k < K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        st.f_u.push_back(raw[0][t](kk, static_cast<Eigen::Index>(p)));
        st.f_v.push_back(raw[1][t](kk, static_cast<Eigen::Index>(p)));
        st.u.push_back(u(kk));
        st.v.push_back(v(kk));
      }
      out.sites.push_back(std::move(st));
    }
  }
  out.config = std::move(cfg);
  return out;
}

}  // namespace dpmf
