#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmf/config.hpp"
#include "dpmf/data.hpp"
#include "dpmf/driver.hpp"
#include "dpmf/predict.hpp"

namespace dpmf {

/// Result of running the sampler over one training set.
struct FitResult {
  std::vector<std::string> teams;
  SeasonCalendar calendar;
  std::vector<GameRecord> games;  // the training games actually used
  HyperMode hyper_mode = HyperMode::Sample;
  HyperSet start_hypers;          // start (Sample) or fixed value (Frozen)
  BlockRun run;
};

/// Hyperparameter handling implied by the config: PMF pins every length
/// scale; a configured frozen file fixes them; otherwise they are sampled.
std::pair<HyperMode, HyperSet> hyper_plan(const RunConfig& cfg, const Model& model);

/// Cold-started chains on `games` (restricted to cfg.burn_seasons when
/// `burn_span` is set), with no fixtures.
FitResult fit_games(const RunConfig& cfg, std::span<const GameRecord> games, bool burn_span = false,
                    std::function<void(int, int, const ModelState&)> observer = {});

struct BlockReportRow {
  ModelChoice model;
  int season = 0;
  std::size_t block = 0;
  double start_week = 0.0;
  double end_week = 0.0;
  std::size_t train_games = 0;
  MetricsRow metrics;
};

struct AggregateRow {
  ModelChoice model;
  std::optional<int> season;  // nullopt: all seasons
  MetricsRow metrics;
};

struct ExpertRow {
  std::optional<int> season;
  ExpertMetrics metrics;
};

struct RollingReport {
  std::vector<int> seasons;
  std::vector<ModelChoice> models;
  std::vector<BlockReportRow> blocks;
  std::vector<AggregateRow> aggregates;
  std::vector<ExpertRow> expert;  // empty when no test game carries lines
};

using ProgressFn = std::function<void(const std::string&)>;

/// Rolling censored-data evaluation of every model in cfg.model_grid().
/// Within a season each block warm-starts from the previous block's final
/// chain states; the first evaluated block of a season cold-starts.
RollingReport evaluate_rolling(const RunConfig& cfg, std::span<const GameRecord> games,
                               const ProgressFn& progress = {});

/// Aggregates block rows per season and overall by exact re-summation.
std::vector<AggregateRow> aggregate(std::span<const BlockReportRow> blocks, std::span<const ModelChoice> models,
                                    std::span<const int> seasons);
/// Expert metrics per season and overall over the given test games.
std::vector<ExpertRow> expert_rows(std::span<const GameRecord> games, std::span<const std::size_t> test_games,
                                   std::span<const int> seasons);

std::string blocks_csv(const RollingReport& r);
std::string aggregate_csv(const RollingReport& r);
/// Three-panel text table: mean log probability, winner error (%), RMSE,
/// with the expert row under the last two panels.
std::string report_table(const RollingReport& r);

}  // namespace dpmf
