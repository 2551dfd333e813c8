#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmf/kernels.hpp"
#include "dpmf/model.hpp"
#include "dpmf/random.hpp"

namespace dpmf {

using Date = std::chrono::sys_days;

Date parse_date(const std::string& iso);  // YYYY-MM-DD; throws DomainError
std::string format_date(Date d);

struct GameRecord {
  Date date{};
  int season = 0;
  double week = 0.0;  // weeks since the dataset epoch
  std::string home_team;
  std::string away_team;
  double home_score = 0.0;
  double away_score = 0.0;
  std::optional<double> home_spread;
  std::optional<double> over_under;

  bool has_lines() const { return home_spread.has_value() && over_under.has_value(); }
};

/// Header of the game CSV format.
inline constexpr const char* kGamesCsvHeader =
    "date,season,home_team,away_team,home_score,away_score,home_spread,over_under";

/// Reads, validates, sorts (date, home, away) and assigns weeks relative to
/// `epoch` (default: the earliest date in the file).
std::vector<GameRecord> load_games(const std::filesystem::path& path,
                                   std::optional<Date> epoch = std::nullopt);
std::vector<GameRecord> parse_games_csv(const std::string& text, std::optional<Date> epoch = std::nullopt);
void save_games(const std::filesystem::path& path, std::span<const GameRecord> games);
std::string games_to_csv(std::span<const GameRecord> games);

/// Recomputes `week` for every record relative to `epoch`.
void assign_weeks(std::vector<GameRecord>& games, Date epoch);

/// Season boundaries at the last game of each season and the first game of
/// the next.
SeasonCalendar calendar_from_games(std::span<const GameRecord> games, double true_gap_weeks = 28.0);

/// Sorted distinct team names; member index = position.
std::vector<std::string> team_table(std::span<const GameRecord> games);
std::size_t team_index(const std::vector<std::string>& teams, const std::string& name);

/// Converts records to model games; `keys` (same length) become Game::key.
std::vector<Game> to_model_games(std::span<const GameRecord> games, const std::vector<std::string>& teams,
                                 std::span<const std::size_t> keys);

struct RollingBlock {
  int season = 0;
  std::size_t index_in_season = 0;
  double block_start_week = 0.0;
  double block_end_week = 0.0;
  std::vector<std::size_t> test_games;   // indices into the source list
  std::vector<std::size_t> train_games;  // indices into the source list
};

/// Contiguous test blocks of `block_weeks` per season starting at each
/// season's first game (the final block of a season may be shorter). Each
/// block trains on every strictly earlier game from the current season and
/// the `previous_seasons` before it.
std::vector<RollingBlock> make_rolling_blocks(std::span<const GameRecord> games, double block_weeks = 4.0,
                                              int previous_seasons = 2);

/// Score pair implied by the betting lines: away + home = over_under and
/// away - home = home_spread. Returns (away, home).
std::array<double, 2> expert_prediction(double home_spread, double over_under);

/// Expert (home, away) prediction for a record, or nullopt when a line is missing.
std::optional<ScorePair> expert_scores(const GameRecord& game);

// Synthetic data drawn from the generative model.

struct SynthConfig {
  std::size_t K = 2;
  std::size_t n_teams = 8;
  int n_seasons = 3;
  double season_weeks = 24.0;
  double true_gap_weeks = 28.0;
  std::string start_date = "2002-10-28";
  KernelSpec kernel = KernelSpec::ard({kTimeDim, kHomeDim});
  std::vector<HyperParams> hypers_u;  // per feature; empty: defaults
  std::vector<HyperParams> hypers_v;
  Eigen::MatrixXd chol_sigma_u;       // empty: identity
  Eigen::MatrixXd chol_sigma_v;
  Eigen::VectorXd mean_u;             // empty: centered on mean_score
  Eigen::VectorXd mean_v;
  double mean_score = 100.0;
  double sigma = 10.0;
  double rho = 0.4;
  bool with_lines = false;
  double line_noise = 3.0;
  std::uint64_t seed = 1;
};

struct SynthSiteTruth {
  std::string team;
  std::size_t game = 0;  // index into the generated records
  double week = 0.0;
  int is_home = 0;
  std::vector<double> f_u;  // per feature, before mixing
  std::vector<double> f_v;
  std::vector<double> u;    // mixed, with mean
  std::vector<double> v;    // mixed, with mean, before softplus
};

struct SynthResult {
  std::vector<GameRecord> games;
  std::vector<ScorePair> expected;  // (Y_home,away, Y_away,home) per game
  std::vector<SynthSiteTruth> sites;
  SeasonCalendar calendar;
  SynthConfig config;  // with defaults filled in
};

SynthResult synth_generate(SynthConfig cfg);

}  // namespace dpmf
