#include <cmath>
#include <limits>

#include "doctest.h"
#include "dpmf/error.hpp"
#include "dpmf/samplers.hpp"

using namespace dpmf;

namespace {

struct Moments {
  double n = 0, s = 0, ss = 0;
  void add(double x) { n += 1, s += x, ss += x * x; }
  double mean() const { return s / n; }
  double var() const { return ss / n - mean() * mean(); }
};

}  // namespace

TEST_CASE("slice sampler targets a standard normal") {
  Rng rng = make_chain_rng(21, 0);
  auto logp = [](double x) { return -0.5 * x * x; };
  double x = 3.0;
  Moments m;
  for (int i = 0; i < 40000; ++i) {
    x = slice_sample_1d(x, logp, SliceConfig{}, rng).value;
    m.add(x);
  }
  CHECK(std::abs(m.mean()) < 0.04);
  CHECK(m.var() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("slice sampler respects hard support edges") {
  Rng rng = make_chain_rng(22, 0);
  auto logp = [](double x) { return x > 0.0 ? -x : -std::numeric_limits<double>::infinity(); };
  double x = 0.5;
  Moments m;
  for (int i = 0; i < 40000; ++i) {
    const SliceResult r = slice_sample_1d(x, logp, SliceConfig{0.7, 32, 200}, rng);
    CHECK(r.value > 0.0);
    CHECK(r.bracket_lo <= x);
    CHECK(r.bracket_hi >= x);
    x = r.value;
    m.add(x);
  }
  CHECK(m.mean() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("slice sampler error paths") {
  Rng rng = make_chain_rng(23, 0);
  auto nowhere = [](double) { return -std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(slice_sample_1d(0.0, nowhere, SliceConfig{}, rng), InvalidStateError);
  auto spike = [](double x) { return x == 0.25 ? 0.0 : -std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(slice_sample_1d(0.25, spike, SliceConfig{1.0, 4, 50}, rng), SamplerError);
  CHECK_THROWS_AS((SliceConfig{0.0, 1, 1}.validate()), ConfigError);
}

TEST_CASE("elliptical slice sampling matches a conjugate Gaussian posterior") {
  // f ~ N(0, 1), y | f ~ N(f, 0.5^2), y = 1.2: posterior N(0.96, 0.2).
  Rng rng = make_chain_rng(24, 0);
  auto ll = [](const Eigen::VectorXd& f) { return -0.5 * (f(0) - 1.2) * (f(0) - 1.2) / 0.25; };
  Eigen::VectorXd f = Eigen::VectorXd::Zero(1);
  Moments m;
  for (int i = 0; i < 40000; ++i) {
    const EllipticalResult r = elliptical_slice(f, nullptr, ll, rng);
    CHECK(r.log_lik > r.threshold);
    CHECK(r.log_lik == doctest::Approx(ll(r.value)));
    f = r.value;
    m.add(f(0));
  }
  CHECK(m.mean() == doctest::Approx(0.96).epsilon(0.03));
  CHECK(m.var() == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("elliptical proposals stay on the ellipse through f and the auxiliary draw") {
  Rng rng = make_chain_rng(25, 0);
  const Eigen::Vector2d f(1.0, 0.0), aux(0.0, 2.0);
  auto ll = [](const Eigen::VectorXd& x) { return -std::abs(x(0) - 0.3); };
  const Eigen::VectorXd fx = f, ax = aux;
  for (int i = 0; i < 200; ++i) {
    const EllipticalResult r = elliptical_slice(fx, nullptr, ll, rng, std::nullopt, &ax);
    // x = cos(phi) f + sin(phi) aux: x0^2 + (x1 / 2)^2 = 1.
    CHECK(r.value(0) * r.value(0) + 0.25 * r.value(1) * r.value(1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto flat = [](const Eigen::VectorXd&) { return 0.0; };
  CHECK(elliptical_slice(fx, nullptr, flat, rng).proposals == 1);
}

TEST_CASE("top-hat hyperparameter prior on the log scale") {
  HyperPrior p;
  p.length_scale_box = {{1.0, 10.0}, {0.5, 2.0}};
  p.sample_gap = true;
  CHECK(hyper_log_prior(HyperParams{{2.0, 1.0}, 5.0}, p) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(hyper_log_prior(HyperParams{{0.9, 1.0}, 5.0}, p)));
  CHECK(std::isinf(hyper_log_prior(HyperParams{{2.0, 2.1}, 5.0}, p)));
  CHECK(std::isinf(hyper_log_prior(HyperParams{{2.0, 1.0}, 0.0}, p)));
  CHECK(std::isfinite(hyper_log_prior(HyperParams{{2.0, 1.0}, 28.0}, p)));
  CHECK(std::isinf(hyper_log_prior(HyperParams{{2.0, 1.0}, 28.5}, p)));
  p.sample_gap = false;
  CHECK(std::isfinite(hyper_log_prior(HyperParams{{2.0, 1.0}, 40.0}, p)));
  CHECK_THROWS_AS(hyper_log_prior(HyperParams{{2.0}, 5.0}, p), DomainError);
}

TEST_CASE("hyperparameter update with a flat likelihood samples the top-hat prior") {
  Rng rng = make_chain_rng(26, 0);
  const KernelSpec spec = KernelSpec::ard({kTimeDim});
  std::vector<std::vector<SideInfo>> sites(2);
  for (int i = 0; i < 4; ++i) {
    SideInfo s;
    s.raw_week = 3.0 * i;
    sites[static_cast<std::size_t>(i % 2)].push_back(s);
  }
  const std::vector<Eigen::VectorXd> nu{Eigen::Vector2d(0.3, -0.5), Eigen::Vector2d(1.1, 0.2)};
  HyperPrior prior;
  prior.length_scale_box = {{1.0, 3.0}};
  const FeatureLogLik flat = [](const std::vector<Eigen::VectorXd>&) { return 0.0; };
  HyperParams theta{{2.0}, 28.0};
  Moments m;
  for (int i = 0; i < 20000; ++i) {
    theta = whitened_hyper_update(nu, 0.0, theta, sites, spec, SeasonCalendar{}, flat, prior, HyperSliceConfig{}, rng);
    REQUIRE(prior.length_scale_box[0].contains(theta.length_scales[0]));
    m.add(theta.length_scales[0]);
  }
  // Uniform on [1, 3]: mean 2, variance 1/3.
  CHECK(m.mean() == doctest::Approx(2.0).epsilon(0.02));
  CHECK(m.var() == doctest::Approx(1.0 / 3.0).epsilon(0.06));
  CHECK(theta.season_gap_weeks == 28.0);
}

TEST_CASE("feature values are mean plus the unwhitened draw") {
  const KernelSpec spec = KernelSpec::ard({kTimeDim});
  std::vector<std::vector<SideInfo>> sites(1, std::vector<SideInfo>(2));
  sites[0][1].raw_week = 1.0;
  const std::vector<Eigen::VectorXd> nu{Eigen::Vector2d(0.5, -1.0)};
  const auto fv = feature_values(nu, 3.0, sites, spec, HyperParams{{2.0}, 28.0}, SeasonCalendar{});
  REQUIRE(fv.has_value());
  const double r = std::exp(-0.5 * 0.25);
  CHECK(fv->f[0](0) == doctest::Approx(3.0 + 0.5));
  CHECK(fv->f[0](1) == doctest::Approx(3.0 + 0.5 * r - std::sqrt(1.0 - r * r)));
}
