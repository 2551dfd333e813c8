#pragma once
// Small models shared by the unit tests.
#include <vector>

#include "dpmf/driver.hpp"
#include "dpmf/model.hpp"

namespace toy {

// Four teams, round robin at weeks 0..10, every game observed.
inline std::vector<dpmf::Game> games(bool observed = true) {
  std::vector<dpmf::Game> g;
  const std::size_t pairs[6][2] = {{0, 1}, {2, 3}, {0, 2}, {1, 3}, {0, 3}, {1, 2}};
  for (std::size_t i = 0; i < 6; ++i) {
    dpmf::Game x;
    x.home = pairs[i][0];
    x.away = pairs[i][1];
    x.week = 2.0 * static_cast<double>(i);
    x.home_score = 95.0 + 3.0 * static_cast<double>(i);
    x.away_score = 101.0 - 2.0 * static_cast<double>(i);
    x.observed = observed;
    x.key = i;
    g.push_back(x);
  }
  return g;
}

inline dpmf::ModelSpec spec(std::size_t K) {
  dpmf::ModelSpec s;
  s.K = K;
  s.kernel = dpmf::KernelSpec::ard({dpmf::kTimeDim, dpmf::kHomeDim});
  return s;
}

inline dpmf::Priors priors(std::size_t K = 2, double mean_score = 98.0) {
  dpmf::Priors p;
  const auto c = dpmf::Priors::mean_centers(mean_score, K);
  p.mean_center_u = c[0];
  p.mean_center_v = c[1];
  p.length_scale_box = {{0.25, 500.0}, {0.01, 100.0}};
  p.log_sigma_mean = std::log(10.0);
  return p;
}

inline dpmf::Model model(std::size_t K = 2, std::vector<dpmf::Game> g = games()) {
  return dpmf::Model(4, std::move(g), spec(K), priors(K));
}

inline dpmf::ModelState start(const dpmf::Model& m, std::uint64_t seed = 1) {
  dpmf::Rng rng = dpmf::make_chain_rng(seed, 0);
  return dpmf::cold_start(m, dpmf::default_hypers(m), dpmf::InitConfig{}, rng);
}

}  // namespace toy
