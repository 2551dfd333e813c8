#include <filesystem>

#include "doctest.h"
#include "dpmf/checkpoint.hpp"
#include "dpmf/config.hpp"
#include "dpmf/error.hpp"
#include "toy.hpp"

using namespace dpmf;

TEST_CASE("config JSON round trip and hash") {
  RunConfig c;
  c.K = 3;
  c.variant = Variant::DPMF_h;
  c.kernel = KernelShape::ArdPeriodic;
  c.schedule.n_chains = 4;
  c.init.sigma = 9.5;
  c.models = {{Variant::PMF, 1}, {Variant::DPMF_th, 2}};
  c.evaluate_seasons = {2004};
  c.frozen_hypers = "h.txt";
  const RunConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  RunConfig d = c;
  d.seed = 2;
  CHECK(config_hash(d) != config_hash(c));
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("config rejects unknown keys and bad values") {
  nlohmann::json j = to_json(RunConfig{});
  j["chians"] = 3;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(RunConfig{});
  j["schedule"]["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK_THROWS_AS(parse_variant("DPMF_x"), ConfigError);
  CHECK(parse_variant("DPMF_t") == Variant::DPMF_t);
  RunConfig c;
  c.K = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.gap_box = {0.0, 40.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), IoError);
}

TEST_CASE("variants choose their kernel dimensions") {
  RunConfig c;
  c.variant = Variant::DPMF_t;
  CHECK(kernel_for(c).length_scale_dims() == std::vector<int>{kTimeDim});
  c.variant = Variant::DPMF_h;
  CHECK(kernel_for(c).length_scale_dims() == std::vector<int>{kHomeDim});
  c.variant = Variant::DPMF_th;
  CHECK(length_scale_boxes(c).size() == 2);
  CHECK(samples_hypers(c));
  c.variant = Variant::PMF;
  CHECK_FALSE(samples_hypers(c));
  c.variant = Variant::DPMF_th;
  c.kernel = KernelShape::ArdPeriodic;
  CHECK(kernel_for(c).num_length_scales() == 3);
  CHECK(c.model_grid().size() == 1);
}

TEST_CASE("hyperparameter text round trip") {
  const Model m = toy::model(2);
  HyperSet h = default_hypers(m);
  h.sides[1][1].length_scales = {17.25, 0.123456789012345};
  const std::string text = hypers_to_text(h, m.spec().kernel);
  CHECK(text.find("V.1.length_scale.1.home 0.123456789012345") != std::string::npos);
  CHECK(text.find("U.0.season_gap_weeks 28") != std::string::npos);
  CHECK(hypers_from_text(text, 2, m.spec().kernel) == h);
  CHECK_THROWS(hypers_from_text(text + "U.0.season_gap_weeks 3\n", 2, m.spec().kernel));
  CHECK_THROWS(hypers_from_text("U.0.length_scale.0.time 3\n", 2, m.spec().kernel));
  CHECK(hyper_names(2, m.spec().kernel).size() == 12);
}

TEST_CASE("median of hyperparameters across chains") {
  const Model m = toy::model(1);
  std::vector<ModelState> states(3, toy::start(m));
  states[0].side(Side::U).hypers[0].length_scales[0] = 5.0;
  states[1].side(Side::U).hypers[0].length_scales[0] = 1.0;
  states[2].side(Side::U).hypers[0].length_scales[0] = 9.0;
  CHECK(median_hypers(states).sides[0][0].length_scales[0] == 5.0);
}

TEST_CASE("checkpoint round trip preserves states and rng positions") {
  const Model m = toy::model(2);
  Checkpoint cp;
  cp.config.K = 2;
  cp.epoch = parse_date("2002-10-28");
  cp.teams = {"A", "B", "C", "D"};
  GameRecord g;
  g.date = cp.epoch;
  g.home_team = "A";
  g.away_team = "B";
  g.home_score = 99;
  g.away_score = 97.5;
  cp.games = {g};
  cp.states = {toy::start(m, 1), toy::start(m, 2)};
  Rng r = make_chain_rng(5, 1);
  r.discard(17);
  cp.rngs = {make_chain_rng(5, 0), r};
  const auto path = std::filesystem::temp_directory_path() / "dpmf_unit_checkpoint.json";
  save_checkpoint(path, cp);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(back.teams == cp.teams);
  CHECK(back.epoch == cp.epoch);
  REQUIRE(back.games.size() == 1);
  CHECK(back.games[0].away_score == 97.5);
  REQUIRE(back.states.size() == 2);
  CHECK(state_to_json(back.states[1]) == state_to_json(cp.states[1]));
  CHECK(back.rngs[1] == r);
  CHECK(rng_from_string(rng_to_string(r)) == r);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}

TEST_CASE("run metadata records seed, hash and version") {
  RunConfig c;
  c.seed = 77;
  const auto j = run_metadata(c, "fit", {{"extra_key", 1}});
  CHECK(j.at("seed") == 77);
  CHECK(j.at("config_hash") == hex64(config_hash(c)));
  CHECK(j.at("code_version") == kCodeVersion);
  CHECK(j.at("run").at("extra_key") == 1);
}
