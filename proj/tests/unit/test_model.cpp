#include <cmath>

#include "doctest.h"
#include "dpmf/error.hpp"
#include "dpmf/model.hpp"
#include "toy.hpp"

using namespace dpmf;

TEST_CASE("site index lists each member's games in order") {
  const auto games = toy::games();
  const MemberSiteIndex ix = MemberSiteIndex::build(games, 4);
  REQUIRE(ix.num_members() == 4);
  // Member 0 is home at weeks 0, 4 and 8.
  const auto s0 = ix.sites(0);
  REQUIRE(s0.size() == 3);
  CHECK(s0[0].raw_week == 0.0);
  CHECK(s0[1].raw_week == 4.0);
  CHECK(s0[2].raw_week == 8.0);
  for (const auto& s : s0) CHECK(s.is_home == 1);
  // Member 3 is always away.
  for (const auto& s : ix.sites(3)) CHECK(s.is_home == 0);
  CHECK(ix.position(2, 0) == 1);
  CHECK(ix.position(5, 2) == 2);
  CHECK_THROWS_AS(ix.position(1, 0), IndexError);
  CHECK_THROWS_AS(ix.position(99, 0), IndexError);
  std::size_t total = 0;
  for (std::size_t m = 0; m < 4; ++m) total += ix.sites(m).size();
  CHECK(total == 2 * games.size());
}

TEST_CASE("bad games are rejected") {
  auto g = toy::games();
  g[0].away = g[0].home;
  CHECK_THROWS_AS(toy::model(2, g), ValidationError);
  g = toy::games();
  g[1].away = 7;
  CHECK_THROWS_AS(toy::model(2, g), IndexError);
  g = toy::games();
  g[3].home_score = std::nan("");
  CHECK_THROWS_AS(toy::model(2, g), ValidationError);
  g[3].observed = false;
  CHECK_NOTHROW(toy::model(2, g));
}

TEST_CASE("softplus and its inverse") {
  for (double r : {-30.0, -2.0, 0.0, 0.5, 3.0, 40.0}) CHECK(softplus_inv(softplus(r)) == doctest::Approx(r).epsilon(1e-10));
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK_THROWS_AS(softplus_inv(0.0), DomainError);
}

TEST_CASE("mean centres reproduce the mean score") {
  for (std::size_t K : {1u, 2u, 5u}) {
    const auto c = Priors::mean_centers(101.5, K);
    CHECK(static_cast<double>(K) * c[0] * softplus(c[1]) == doctest::Approx(101.5).epsilon(1e-12));
  }
}

TEST_CASE("whiten inverts unwhiten") {
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  const Eigen::MatrixXd l = chol_jitter(a).lower;
  const Eigen::Vector3d nu(0.4, -1.2, 2.0);
  const Eigen::VectorXd f = unwhiten(nu, l);
  CHECK((f - l * nu).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((whiten(f, l) - nu).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(whiten(Eigen::Vector2d(1, 2), l), DomainError);
}

TEST_CASE("Y is the inner product of offense and softplus defense") {
  const Model m = toy::model(2);
  ModelState st = toy::start(m, 4);
  st.side(Side::U).chol_sigma(1, 0) = 0.3;
  st.side(Side::V).chol_sigma(1, 1) = 0.8;
  const LatentCache cache(m, st);
  for (std::size_t g = 0; g < m.games().size(); ++g) {
    const Game& game = m.games()[g];
    const std::size_t ph = m.index().position(g, game.home), pa = m.index().position(g, game.away);
    // Mix by hand from the cached per-feature function values.
    auto mixed = [&](Side s, std::size_t member, std::size_t pos) {
      Eigen::VectorXd f(2);
      for (std::size_t k = 0; k < 2; ++k) f(k) = cache.f(s, k, member)(pos);
      return Eigen::VectorXd(st.side(s).chol_sigma * f + st.side(s).mean);
    };
    const Eigen::VectorXd uh = mixed(Side::U, game.home, ph), va = mixed(Side::V, game.away, pa);
    const Eigen::VectorXd ua = mixed(Side::U, game.away, pa), vh = mixed(Side::V, game.home, ph);
    double yh = 0, ya = 0;
    for (int k = 0; k < 2; ++k) {
      yh += uh(k) * softplus(va(k));
      ya += ua(k) * softplus(vh(k));
    }
    CHECK(y_value(m, st, g, Direction::HomeVsAway) == doctest::Approx(yh).epsilon(1e-12));
    CHECK(y_value(m, st, g, Direction::AwayVsHome) == doctest::Approx(ya).epsilon(1e-12));
    const ScorePair p = cache.y_pair(st, g);
    CHECK(p[0] == doctest::Approx(yh).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(ya).epsilon(1e-12));
    CHECK((cache.latent(st, Side::U, game.home, ph) - uh).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(cache.loglik_all(st) == doctest::Approx(game_loglik(m, st)).epsilon(1e-12));
}

TEST_CASE("latent vectors at sites agree with the cache") {
  const Model m = toy::model(3);
  const ModelState st = toy::start(m, 9);
  const LatentCache cache(m, st);
  const LatentAtSites lat = latent_vectors_at_sites(m, st);
  for (Side s : kSides)
    for (std::size_t member = 0; member < 4; ++member) {
      const Eigen::MatrixXd& v = lat.values[idx(s)][member];
      REQUIRE(v.rows() == 3);
      for (Eigen::Index p = 0; p < v.cols(); ++p)
        CHECK((v.col(p) - cache.latent(st, s, member, static_cast<std::size_t>(p))).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("patching one feature keeps the cache consistent with a rebuild") {
  const Model m = toy::model(2);
  ModelState st = toy::start(m, 2);
  LatentCache cache(m, st);
  st.side(Side::V).hypers[1].length_scales = {3.0, 0.4};
  st.side(Side::V).nu[1][2](0) += 0.7;
  cache.refresh_feature(st, Side::V, 1);
  const LatentCache fresh(m, st);
  for (std::size_t g = 0; g < m.games().size(); ++g) {
    CHECK(cache.y_pair(st, g)[0] == doctest::Approx(fresh.y_pair(st, g)[0]).epsilon(1e-14));
    CHECK(cache.y_pair(st, g)[1] == doctest::Approx(fresh.y_pair(st, g)[1]).epsilon(1e-14));
  }
}

TEST_CASE("state validation catches broken shapes and supports") {
  const Model m = toy::model(2);
  const ModelState good = toy::start(m);
  CHECK_NOTHROW(good.validate(m));
  ModelState s = good;
  s.side(Side::U).chol_sigma(0, 0) = -1.0;
  CHECK_THROWS_AS(s.validate(m), InvalidStateError);
  s = good;
  s.side(Side::V).chol_sigma(0, 1) = 0.2;
  CHECK_THROWS_AS(s.validate(m), InvalidStateError);
  s = good;
  s.side(Side::U).nu[0][1].resize(1);
  CHECK_THROWS_AS(s.validate(m), InvalidStateError);
  s = good;
  s.side(Side::V).hypers[0].season_gap_weeks = 30.0;
  CHECK_THROWS_AS(s.validate(m), InvalidStateError);
  s = good;
  s.lik.rho = 1.5;
  CHECK_THROWS_AS(s.validate(m), InvalidStateError);
}
