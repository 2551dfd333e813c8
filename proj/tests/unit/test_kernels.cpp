#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dpmf/error.hpp"
#include "dpmf/kernels.hpp"
#include "dpmf/random.hpp"

using namespace dpmf;

namespace {

SideInfo at(double week, int home = 0) {
  SideInfo s;
  s.raw_week = week;
  s.is_home = home;
  return s;
}

SeasonCalendar two_seasons() {
  SeasonCalendar cal;
  cal.boundaries.push_back({20.0, 48.0});  // off-season of exactly 28 weeks
  return cal;
}

}  // namespace

TEST_CASE("warp is the identity at the true gap") {
  const SeasonCalendar cal = two_seasons();
  for (double w : {0.0, 3.5, 20.0, 30.0, 48.0, 60.25}) CHECK(warp_time(w, 28.0, cal) == w);
}

TEST_CASE("weeks inside the first season are never warped") {
  const SeasonCalendar cal = two_seasons();
  for (double gap : {0.5, 4.0, 27.0})
    for (double w : {0.0, 7.0, 19.9}) CHECK(warp_time(w, gap, cal) == w);
}

TEST_CASE("one completed off-season removes true_gap - gap weeks") {
  const SeasonCalendar cal = two_seasons();
  CHECK(warp_time(49.0, 4.0, cal) == doctest::Approx(49.0 - 24.0).epsilon(1e-14));
}

TEST_CASE("warp is increasing for every admissible gap") {
  SeasonCalendar cal;
  cal.boundaries = {{20.0, 50.0}, {72.0, 99.0}, {120.0, 150.0}};
  Rng rng = make_chain_rng(3, 0);
  for (int t = 0; t < 200; ++t) {
    const double gap = 28.0 * (1.0 - uniform01(rng));
    const double a = uniform(rng, 0.0, 200.0);
    const double b = a + uniform(rng, 1e-6, 20.0);
    CHECK(warp_time(a, gap, cal) < warp_time(b, gap, cal));
  }
}

TEST_CASE("warp rejects gaps outside (0, true gap] and bad weeks") {
  const SeasonCalendar cal = two_seasons();
  CHECK_THROWS_AS(warp_time(1.0, 0.0, cal), DomainError);
  CHECK_THROWS_AS(warp_time(1.0, 28.5, cal), DomainError);
  CHECK_THROWS_AS(warp_time(-1.0, 4.0, cal), DomainError);
  CHECK_THROWS_AS(warp_time(std::nan(""), 4.0, cal), DomainError);
}

TEST_CASE("ARD correlation matches the squared-exponential formula") {
  const std::vector<int> dims{kTimeDim, kHomeDim};
  const std::vector<double> ls{3.0, 0.7};
  const double expect = std::exp(-0.5 * ((2.0 / 3.0) * (2.0 / 3.0) + (1.0 / 0.7) * (1.0 / 0.7)));
  CHECK(corr_ard(at(5.0, 1), at(7.0, 0), dims, ls) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(corr_ard(at(5.0, 1), at(5.0, 1), dims, ls) == 1.0);
}

TEST_CASE("periodic correlation with period 2 pi is the textbook form") {
  const double x1 = 0.3, x2 = 2.1, ell = 0.8;
  const double s = std::sin((x1 - x2) / 2.0);
  CHECK(corr_periodic(x1, x2, ell, 2.0 * std::numbers::pi) ==
        doctest::Approx(std::exp(-2.0 * s * s / (ell * ell))).epsilon(1e-14));
  CHECK(corr_periodic(0.0, 52.0, 1.0, 52.0) == doctest::Approx(1.0));
}

TEST_CASE("product kernel multiplies its factors") {
  const KernelSpec ard = KernelSpec::ard({kTimeDim, kHomeDim});
  const KernelSpec per = KernelSpec::periodic(kTimeDim, 52.0);
  const KernelSpec prod = KernelSpec::product({ard, per});
  CHECK(prod.num_length_scales() == 3);
  const std::vector<double> ls{10.0, 0.5, 1.5};
  const SideInfo a = at(3.0, 1), b = at(17.0, 0);
  const double expect = kernel_value(ard, a, b, std::vector<double>{10.0, 0.5}) *
                        kernel_value(per, a, b, std::vector<double>{1.5});
  CHECK(kernel_value(prod, a, b, ls) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("Gram matrix agrees with pointwise kernel values on warped time") {
  SeasonCalendar cal;
  cal.boundaries = {{10.0, 40.0}};
  const KernelSpec spec = KernelSpec::product({KernelSpec::ard({kTimeDim, kHomeDim}), KernelSpec::periodic(kTimeDim, 52.0)});
  HyperParams hp{{6.0, 0.9, 2.0}, 9.0};
  const std::vector<SideInfo> pts{at(1.0, 1), at(4.0, 0), at(9.0, 1), at(41.0, 0), at(45.0, 1)};
  const Eigen::MatrixXd g = gram(pts, spec, hp, cal);
  const auto warped = warp_points(pts, hp.season_gap_weeks, cal);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK(g(i, j) == doctest::Approx(kernel_value(spec, warped[i], warped[j], hp.length_scales)).epsilon(1e-14));
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd k = cross_corr(pts, at(43.0, 1), spec, hp, cal);
  std::vector<SideInfo> with_target = pts;
  with_target.push_back(at(43.0, 1));
  const Eigen::MatrixXd g2 = gram(with_target, spec, hp, cal);
  for (Eigen::Index i = 0; i < k.size(); ++i) CHECK(k(i) == doctest::Approx(g2(i, 5)).epsilon(1e-14));
}

TEST_CASE("random Gram matrices are positive semi-definite") {
  Rng rng = make_chain_rng(5, 0);
  const KernelSpec spec = KernelSpec::ard({kTimeDim, kHomeDim});
  for (int t = 0; t < 50; ++t) {
    std::vector<SideInfo> pts;
    const int n = 2 + static_cast<int>(uniform01(rng) * 30);
    for (int i = 0; i < n; ++i) pts.push_back(at(uniform(rng, 0, 60), uniform01(rng) < 0.5));
    HyperParams hp{{uniform(rng, 0.5, 50), uniform(rng, 0.05, 10)}, 28.0};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(pts, spec, hp, SeasonCalendar{}));
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("jitter ladder") {
  SUBCASE("well-conditioned matrices need no jitter") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.5, 0.5, 1.0;
    const auto f = chol_jitter(m);
    CHECK(f.jitter == 0.0);
    CHECK((f.lower * f.lower.transpose() - m).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("duplicate sites climb the ladder") {
    const std::vector<SideInfo> pts{at(2.0, 1), at(2.0, 1), at(5.0, 0)};
    const auto f = chol_jitter(gram(pts, KernelSpec::ard({kTimeDim, kHomeDim}), HyperParams{{3.0, 1.0}, 28.0}, {}));
    CHECK(f.jitter > 0.0);
    CHECK(f.jitter <= 1e-6);
  }
  SUBCASE("indefinite matrices fail past the last rung") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(chol_jitter(m), NotPositiveDefinite);
  }
}

TEST_CASE("kernel definition validation") {
  CHECK_THROWS_AS(KernelSpec::ard({}).validate(2), Error);
  CHECK_THROWS_AS(KernelSpec::ard({kTimeDim, 5}).validate(2), Error);
  CHECK_NOTHROW(KernelSpec::ard({kTimeDim, kHomeDim}).validate(2));
  CHECK(KernelSpec::ard({kHomeDim}).uses_dim(kHomeDim));
  CHECK_FALSE(KernelSpec::ard({kHomeDim}).uses_dim(kTimeDim));
  CHECK_THROWS_AS(corr_periodic(0.0, 1.0, 1.0, 0.0), DomainError);
  HyperParams bad{{-1.0, 1.0}, 28.0};
  CHECK_THROWS_AS(gram(std::vector<SideInfo>{at(0.0)}, KernelSpec::ard({kTimeDim, kHomeDim}), bad, {}), DomainError);
}
