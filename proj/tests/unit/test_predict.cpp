#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "doctest.h"
#include "dpmf/error.hpp"
#include "dpmf/predict.hpp"
#include "toy.hpp"

using namespace dpmf;

TEST_CASE("GP conditional at a training site returns the training value") {
  std::vector<SideInfo> sites(3);
  sites[0].raw_week = 0.0;
  sites[1].raw_week = 2.0;
  sites[2].raw_week = 5.0;
  const KernelSpec spec = KernelSpec::ard({kTimeDim});
  const HyperParams hp{{3.0}, 28.0};
  const Eigen::Vector3d f(0.4, -0.2, 1.1);
  const GpConditional c = gp_conditional(sites, f, sites[1], spec, hp, SeasonCalendar{});
  CHECK(c.mean == doctest::Approx(-0.2).epsilon(1e-8));
  CHECK(c.var == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("GP conditional with one training point is the bivariate normal formula") {
  std::vector<SideInfo> train(1);
  SideInfo test;
  test.raw_week = 1.5;
  const KernelSpec spec = KernelSpec::ard({kTimeDim});
  const HyperParams hp{{2.0}, 28.0};
  const double r = std::exp(-0.5 * 0.75 * 0.75);
  const GpConditional c = gp_conditional(train, Eigen::VectorXd::Constant(1, 0.8), test, spec, hp, SeasonCalendar{});
  CHECK(c.mean == doctest::Approx(r * 0.8).epsilon(1e-14));
  CHECK(c.var == doctest::Approx(1.0 - r * r).epsilon(1e-14));
  SideInfo far;
  far.raw_week = 1e4;
  const GpConditional prior = gp_conditional(train, Eigen::VectorXd::Constant(1, 0.8), far, spec, hp, SeasonCalendar{});
  CHECK(prior.mean == doctest::Approx(0.0));
  CHECK(prior.var == doctest::Approx(1.0));
}

namespace {

double bvn(const ScorePair& z, const MixtureComponent& c) { return std::exp(score_pair_logpdf(z, c.mean, c.lik)); }

}  // namespace

TEST_CASE("one-component mixture is the component density") {
  const MixtureComponent c{{100.0, 95.0}, {9.0, 0.3}};
  const PredictiveMixture mix({c});
  const ScorePair z{104.0, 90.0};
  CHECK(mix.logpdf(z) == doctest::Approx(score_pair_logpdf(z, c.mean, c.lik)).epsilon(1e-14));
  CHECK(mixture_logpdf(mix, z) == mix.logpdf(z));
}

TEST_CASE("mixture density is the average of component densities") {
  const std::vector<MixtureComponent> cs{{{100.0, 95.0}, {9.0, 0.3}}, {{92.0, 99.0}, {11.0, -0.1}}, {{105.0, 104.0}, {7.5, 0.6}}};
  const PredictiveMixture mix(cs);
  for (const ScorePair z : {ScorePair{98.0, 97.0}, ScorePair{120.0, 80.0}, ScorePair{60.0, 150.0}}) {
    double direct = 0.0;
    for (const auto& c : cs) direct += bvn(z, c);
    CHECK(mix.logpdf(z) == doctest::Approx(std::log(direct / 3.0)).epsilon(1e-12));
  }
  auto perm = cs;
  std::rotate(perm.begin(), perm.begin() + 1, perm.end());
  CHECK(PredictiveMixture(perm).logpdf({98.0, 97.0}) == doctest::Approx(mix.logpdf({98.0, 97.0})).epsilon(1e-14));
  // Duplicating every component leaves an equal-weight mixture unchanged.
  auto dup = cs;
  dup.insert(dup.end(), cs.begin(), cs.end());
  CHECK(PredictiveMixture(dup).logpdf({98.0, 97.0}) == doctest::Approx(mix.logpdf({98.0, 97.0})).epsilon(1e-14));
  // Far tails stay finite thanks to the max shift.
  CHECK(std::isfinite(mix.logpdf({1000.0, -900.0})));
  CHECK_THROWS_AS(PredictiveMixture(std::vector<MixtureComponent>{}), DomainError);
}

TEST_CASE("win probability from the difference of correlated scores") {
  // Difference sd = sqrt(2 * 100 * 0.5) = 10, mean gap 5: Phi(0.5).
  const PredictiveMixture mix({MixtureComponent{{105.0, 100.0}, {10.0, 0.5}}});
  CHECK(mix.prob_first_wins() == doctest::Approx(0.6914624612740131).epsilon(1e-12));
  const PredictiveMixture rev({MixtureComponent{{100.0, 105.0}, {10.0, 0.5}}});
  CHECK(mix.prob_first_wins() + rev.prob_first_wins() == doctest::Approx(1.0).epsilon(1e-14));
  const PredictiveMixture two({MixtureComponent{{105.0, 100.0}, {10.0, 0.5}}, MixtureComponent{{100.0, 100.0}, {8.0, 0.0}}});
  CHECK(two.prob_first_wins() == doctest::Approx(0.5 * (0.6914624612740131 + 0.5)).epsilon(1e-12));
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("metrics against a naive computation") {
  const std::vector<PredictiveMixture> mixes{
      PredictiveMixture({MixtureComponent{{100.0, 90.0}, {10.0, 0.2}}, MixtureComponent{{96.0, 94.0}, {10.0, 0.2}}}),
      PredictiveMixture({MixtureComponent{{88.0, 99.0}, {12.0, 0.0}}}),
      PredictiveMixture({MixtureComponent{{101.0, 100.0}, {9.0, 0.4}}})};
  const std::vector<ScorePair> truth{{102.0, 95.0}, {100.0, 97.0}, {90.0, 104.0}};
  const std::vector<std::optional<ScorePair>> expert{ScorePair{99.0, 93.0}, std::nullopt, ScorePair{100.0, 100.0}};
  const MetricsRow row = metrics(mixes, truth, expert);
  CHECK(row.games == 3);
  double lp = 0, sq = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    lp += mixes[i].logpdf(truth[i]);
    const ScorePair m = mixes[i].mean();
    sq += std::pow(m[0] - truth[i][0], 2) + std::pow(m[1] - truth[i][1], 2);
  }
  CHECK(row.mean_log_prob == doctest::Approx(lp / 3.0).epsilon(1e-14));
  CHECK(row.rmse == doctest::Approx(std::sqrt(sq / 6.0)).epsilon(1e-14));
  // Game 1 predicts home, home won; game 2 predicts away, home won; game 3
  // predicts home, away won.
  CHECK(row.winner_error == doctest::Approx(2.0 / 3.0));
  REQUIRE(row.expert.has_value());
  CHECK(row.expert->games == 2);
  // A tied expert line counts as picking the home team, which lost game 3.
  CHECK(row.expert->winner_error == doctest::Approx(0.5));
  CHECK(row.expert->rmse == doctest::Approx(std::sqrt((9.0 + 4.0 + 100.0 + 16.0) / 4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(metrics(mixes, std::vector<ScorePair>(2), {}), DomainError);
}

TEST_CASE("perfect point predictions have zero RMSE") {
  const std::vector<PredictiveMixture> mixes{PredictiveMixture({MixtureComponent{{110.0, 100.0}, {5.0, 0.0}}})};
  const std::vector<ScorePair> truth{{110.0, 100.0}};
  const MetricsRow row = metrics(mixes, truth);
  CHECK(row.rmse == 0.0);
  CHECK(row.winner_error == 0.0);
  CHECK_FALSE(row.expert.has_value());
}

TEST_CASE("predictive draws for a played game reproduce the fitted Y") {
  const Model m = toy::model(2);
  const ModelState st = toy::start(m, 5);
  Rng rng = make_chain_rng(3, 0);
  // Game 2 is member 0 hosting member 2 at week 4; both have a site there.
  const std::vector<Fixture> fx{{0, 2, 4.0}, {3, 1, 40.0}};
  const auto draws = draw_predictive_state(m, st, fx, rng);
  REQUIRE(draws.size() == 2);
  CHECK(draws[0][0] == doctest::Approx(y_value(m, st, 2, Direction::HomeVsAway)).epsilon(1e-5));
  CHECK(draws[0][1] == doctest::Approx(y_value(m, st, 2, Direction::AwayVsHome)).epsilon(1e-5));
  CHECK(std::isfinite(draws[1][0]));
  const std::vector<Fixture> bad{{0, 9, 4.0}};
  CHECK_THROWS_AS(draw_predictive_state(m, st, bad, rng), IndexError);
}
