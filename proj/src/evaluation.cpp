#include "dpmf/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <set>

#include "dpmf/checkpoint.hpp"
#include "dpmf/error.hpp"

namespace dpmf {

namespace {

std::vector<std::size_t> iota_keys(std::size_t n) {
  std::vector<std::size_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = i;
  return keys;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string model_label(const ModelChoice& m) { return variant_name(m.variant); }

}  // namespace

std::pair<HyperMode, HyperSet> hyper_plan(const RunConfig& cfg, const Model& model) {
  if (!samples_hypers(cfg)) return {HyperMode::Frozen, pinned_hypers(model)};
  if (cfg.frozen_hypers) return {HyperMode::Frozen, load_hypers(*cfg.frozen_hypers, cfg.K, model.spec().kernel)};
  return {HyperMode::Sample, default_hypers(model)};
}

FitResult fit_games(const RunConfig& cfg, std::span<const GameRecord> games, bool burn_span,
                    std::function<void(int, int, const ModelState&)> observer) {
  cfg.validate();
  FitResult out;
  for (const auto& g : games) {
    if (burn_span && !cfg.burn_seasons.empty() &&
        std::find(cfg.burn_seasons.begin(), cfg.burn_seasons.end(), g.season) == cfg.burn_seasons.end())
      continue;
    out.games.push_back(g);
  }
  if (out.games.empty()) throw ConfigError("no training games in the requested span");
  out.teams = team_table(out.games);
  out.calendar = calendar_from_games(out.games, cfg.true_gap_weeks);
  const auto keys = iota_keys(out.games.size());
  const Model model = build_model(cfg, out.games, keys, out.teams, out.calendar);
  auto [mode, hypers] = hyper_plan(cfg, model);
  if (burn_span && mode == HyperMode::Frozen && samples_hypers(cfg))
    throw ConfigError("--burn-hypers samples hyperparameters; drop frozen_hypers from the config");
  out.hyper_mode = mode;
  out.start_hypers = hypers;

  RunOptions opts;
  opts.init = cfg.init;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  opts.observer = std::move(observer);
  out.run = run_block(model, nullptr, {}, cfg.schedule, mode, hypers, opts);
  return out;
}

RollingReport evaluate_rolling(const RunConfig& cfg, std::span<const GameRecord> games, const ProgressFn& progress) {
  cfg.validate();
  if (games.empty()) throw ConfigError("no games to evaluate");
  const auto teams = team_table(games);
  const SeasonCalendar calendar = calendar_from_games(games, cfg.true_gap_weeks);
  auto blocks = make_rolling_blocks(games, cfg.block_weeks, cfg.previous_seasons);
  std::erase_if(blocks, [&](const RollingBlock& b) {
    if (b.train_games.empty() || b.test_games.empty()) return true;
    return !cfg.evaluate_seasons.empty() &&
           std::find(cfg.evaluate_seasons.begin(), cfg.evaluate_seasons.end(), b.season) == cfg.evaluate_seasons.end();
  });
  if (blocks.empty()) throw ConfigError("no evaluable blocks (every block lacks training data or is filtered out)");

  RollingReport report;
  report.models = cfg.model_grid();
  std::set<int> seasons;
  std::vector<std::size_t> all_tests;
  for (const auto& b : blocks) {
    seasons.insert(b.season);
    all_tests.insert(all_tests.end(), b.test_games.begin(), b.test_games.end());
  }
  report.seasons.assign(seasons.begin(), seasons.end());

  for (const auto& choice : report.models) {
    const RunConfig mcfg = cfg.with_model(choice);
    std::unique_ptr<Model> prev_model;
    std::vector<ModelState> prev_states;
    int prev_season = 0;
    std::uint64_t ordinal = 0;
    for (const auto& b : blocks) {
      ++ordinal;
      std::vector<GameRecord> train;
      for (std::size_t i : b.train_games) {
        if (!(games[i].week < b.block_start_week))
          throw InvalidStateError("training game at or after the block start");
        train.push_back(games[i]);
      }
      auto model = std::make_unique<Model>(build_model(mcfg, train, b.train_games, teams, calendar));
      auto [mode, hypers] = hyper_plan(mcfg, *model);

      std::vector<Fixture> fixtures;
      std::vector<ScorePair> truths;
      std::vector<std::optional<ScorePair>> expert;
      for (std::size_t i : b.test_games) {
        const auto& g = games[i];
        fixtures.push_back({team_index(teams, g.home_team), team_index(teams, g.away_team), g.week});
        truths.push_back({g.home_score, g.away_score});
        expert.push_back(expert_scores(g));
      }

      RunOptions opts;
      opts.init = mcfg.init;
      opts.seed = mcfg.seed;
      opts.stream = 2 * ordinal;
      opts.threads = mcfg.threads;

      std::vector<ModelState> warm;
      const bool use_warm = prev_model && prev_season == b.season;
      if (use_warm) {
        for (std::size_t c = 0; c < prev_states.size(); ++c) {
          Rng rng = make_chain_rng(mcfg.seed, c, 2 * ordinal + 1);
          warm.push_back(warm_start(*prev_model, prev_states[c], *model, mcfg.init, rng));
        }
      }
      BlockRun run = run_block(*model, use_warm ? &warm : nullptr, fixtures, mcfg.schedule, mode, hypers, opts);

      std::vector<PredictiveMixture> mixes;
      for (std::size_t f = 0; f < fixtures.size(); ++f) mixes.push_back(run.bank.mixture(f));
      BlockReportRow row{choice, b.season, b.index_in_season, b.block_start_week, b.block_end_week,
                         b.train_games.size(), metrics(mixes, truths, expert)};
      if (progress)
        progress(model_label(choice) + " K" + std::to_string(choice.K) + " season " + std::to_string(b.season) +
                 " block " + std::to_string(b.index_in_season) + ": " + std::to_string(row.metrics.games) +
                 " games, mean log prob " + fmt("%.4f", row.metrics.mean_log_prob));
      report.blocks.push_back(std::move(row));

      prev_states = std::move(run.final_states);
      prev_model = std::move(model);
      prev_season = b.season;
    }
  }
  report.aggregates = aggregate(report.blocks, report.models, report.seasons);
  report.expert = expert_rows(games, all_tests, report.seasons);
  return report;
}

std::vector<AggregateRow> aggregate(std::span<const BlockReportRow> blocks, std::span<const ModelChoice> models,
                                    std::span<const int> seasons) {
  auto finish = [](MetricsRow m) {
    if (m.games > 0) {
      const double g = static_cast<double>(m.games);
      m.mean_log_prob = m.sum_log_prob / g;
      m.winner_error = m.winner_wrong / g;
      m.rmse = std::sqrt(m.sum_sq_error / (2.0 * g));
    }
    m.expert.reset();
    return m;
  };
  std::vector<AggregateRow> out;
  for (const auto& m : models) {
    MetricsRow all;
    for (int s : seasons) {
      MetricsRow row;
      for (const auto& b : blocks) {
        if (b.model.variant != m.variant || b.model.K != m.K || b.season != s) continue;
        row.games += b.metrics.games;
        row.sum_log_prob += b.metrics.sum_log_prob;
        row.winner_wrong += b.metrics.winner_wrong;
        row.sum_sq_error += b.metrics.sum_sq_error;
      }
      all.games += row.games;
      all.sum_log_prob += row.sum_log_prob;
      all.winner_wrong += row.winner_wrong;
      all.sum_sq_error += row.sum_sq_error;
      out.push_back({m, s, finish(row)});
    }
    out.push_back({m, std::nullopt, finish(all)});
  }
  return out;
}

std::vector<ExpertRow> expert_rows(std::span<const GameRecord> games, std::span<const std::size_t> test_games,
                                   std::span<const int> seasons) {
  std::vector<ExpertRow> out;
  std::vector<ScorePair> all_truth;
  std::vector<std::optional<ScorePair>> all_pred;
  for (int s : seasons) {
    std::vector<ScorePair> truth;
    std::vector<std::optional<ScorePair>> pred;
    for (std::size_t i : test_games) {
      if (games[i].season != s) continue;
      truth.push_back({games[i].home_score, games[i].away_score});
      pred.push_back(expert_scores(games[i]));
    }
    all_truth.insert(all_truth.end(), truth.begin(), truth.end());
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    if (auto em = expert_metrics(truth, pred)) out.push_back({s, *em});
  }
  if (auto em = expert_metrics(all_truth, all_pred)) out.push_back({std::nullopt, *em});
  else out.clear();
  return out;
}

std::string blocks_csv(const RollingReport& r) {
  std::string out =
      "model,K,season,block,block_start_week,block_end_week,train_games,test_games,mean_log_prob,winner_error,rmse,"
      "expert_games,expert_winner_error,expert_rmse\n";
  for (const auto& b : r.blocks) {
    const auto& m = b.metrics;
    out += model_label(b.model) + "," + std::to_string(b.model.K) + "," + std::to_string(b.season) + "," +
           std::to_string(b.block) + "," + fmt("%.6f", b.start_week) + "," + fmt("%.6f", b.end_week) + "," +
           std::to_string(b.train_games) + "," + std::to_string(m.games) + "," + fmt("%.6f", m.mean_log_prob) + "," +
           fmt("%.6f", m.winner_error) + "," + fmt("%.6f", m.rmse) + ",";
    if (m.expert)
      out += std::to_string(m.expert->games) + "," + fmt("%.6f", m.expert->winner_error) + "," +
             fmt("%.6f", m.expert->rmse);
    else
      out += ",,";
    out += "\n";
  }
  return out;
}

std::string aggregate_csv(const RollingReport& r) {
  std::string out = "model,K,season,games,mean_log_prob,winner_error,rmse\n";
  auto season_label = [](const std::optional<int>& s) { return s ? std::to_string(*s) : std::string("all"); };
  for (const auto& a : r.aggregates)
    out += model_label(a.model) + "," + std::to_string(a.model.K) + "," + season_label(a.season) + "," +
           std::to_string(a.metrics.games) + "," + fmt("%.6f", a.metrics.mean_log_prob) + "," +
           fmt("%.6f", a.metrics.winner_error) + "," + fmt("%.6f", a.metrics.rmse) + "\n";
  for (const auto& e : r.expert)
    out += "Expert,," + season_label(e.season) + "," + std::to_string(e.metrics.games) + ",," +
           fmt("%.6f", e.metrics.winner_error) + "," + fmt("%.6f", e.metrics.rmse) + "\n";
  return out;
}

std::string report_table(const RollingReport& r) {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  auto header = [&]() {
    std::string h = pad("", 9) + pad("", 4);
    for (int s : r.seasons) h += pad(std::to_string(s), 9);
    return h + pad("All", 9) + "\n";
  };
  auto find = [&](const ModelChoice& m, std::optional<int> s) -> const MetricsRow& {
    for (const auto& a : r.aggregates)
      if (a.model.variant == m.variant && a.model.K == m.K && a.season == s) return a.metrics;
    throw InvalidStateError("report: missing aggregate row");
  };
  auto panel = [&](const std::string& title, auto value, const char* f, auto expert_value) {
    std::string out = title + "\n" + header();
    std::string last;
    for (const auto& m : r.models) {
      const std::string label = model_label(m);
      std::string line = pad(label == last ? "" : label, 9) + pad("K" + std::to_string(m.K), 4);
      last = label;
      for (int s : r.seasons) line += pad(fmt(f, value(find(m, s))), 9);
      out += line + pad(fmt(f, value(find(m, std::nullopt))), 9) + "\n";
    }
    if constexpr (!std::is_same_v<decltype(expert_value), std::nullptr_t>) {
      if (!r.expert.empty()) {
        std::string line = pad("Expert", 9) + pad("", 4);
        for (int s : r.seasons) {
          std::string cell = "-";
          for (const auto& e : r.expert)
            if (e.season == s) cell = fmt(f, expert_value(e.metrics));
          line += pad(cell, 9);
        }
        out += line + pad(fmt(f, expert_value(r.expert.back().metrics)), 9) + "\n";
      }
    }
    return out;
  };
  std::string out;
  out += panel("(a) Mean log probability of test scores", [](const MetricsRow& m) { return m.mean_log_prob; }, "%.3f",
               nullptr);
  out += "\n";
  out += panel("(b) Winner prediction error (%)", [](const MetricsRow& m) { return 100.0 * m.winner_error; }, "%.1f",
               [](const ExpertMetrics& e) { return 100.0 * e.winner_error; });
  out += "\n";
  out += panel("(c) Score RMSE", [](const MetricsRow& m) { return m.rmse; }, "%.2f",
               [](const ExpertMetrics& e) { return e.rmse; });
  return out;
}

}  // namespace dpmf
