#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpmf/config.hpp"
#include "dpmf/data.hpp"
#include "dpmf/evaluation.hpp"

namespace dpmf {

/// Parses `args` (without the program name), runs the subcommand, and
/// returns the process exit status. Errors are reported on `err` as
/// "<category>: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct FitOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path metadata;
  std::optional<std::filesystem::path> hypers;  // frozen file (with --burn-hypers)
  std::optional<std::filesystem::path> trace;   // per-sweep hyperparameter trace
};

void cmd_fit(const RunConfig& cfg, const std::filesystem::path& data, bool burn_hypers, const FitOutputs& outputs);

void cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& fixtures,
                 const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                 std::optional<std::array<double, 3>> grid);

void cmd_evaluate_rolling(const RunConfig& cfg, const std::filesystem::path& data,
                          const std::filesystem::path& out_dir, std::ostream* progress);

void cmd_synth(const SynthConfig& cfg, const std::filesystem::path& out, const std::filesystem::path& truth);

/// Expert predictions per game plus per-season metrics; returns the summary table.
std::string cmd_expert_baseline(const std::filesystem::path& data, const std::filesystem::path& out);

/// Fixture CSV: `date,home_team,away_team`.
struct FixtureRecord {
  Date date{};
  std::string home_team;
  std::string away_team;
};
std::vector<FixtureRecord> parse_fixtures_csv(const std::string& text);

}  // namespace dpmf
