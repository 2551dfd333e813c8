#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpmf/config.hpp"
#include "dpmf/data.hpp"
#include "dpmf/driver.hpp"

namespace dpmf {

inline constexpr int kCheckpointSchema = 1;

/// Everything needed to resume or predict from a fit: the configuration,
/// the training data, and each chain's state with its rng position.
struct Checkpoint {
  RunConfig config;
  Date epoch{};
  std::vector<std::string> teams;
  SeasonCalendar calendar;
  std::vector<GameRecord> games;
  HyperMode hyper_mode = HyperMode::Sample;
  HyperSet frozen;  // meaningful when hyper_mode is Frozen
  std::vector<ModelState> states;
  std::vector<Rng> rngs;
};

nlohmann::json state_to_json(const ModelState& s);
ModelState state_from_json(const nlohmann::json& j);

std::string rng_to_string(const Rng& rng);
Rng rng_from_string(const std::string& s);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameter names in file order: per side, per feature, the length scales
/// then the season gap.
std::vector<std::string> hyper_names(std::size_t K, const KernelSpec& spec);

/// Frozen hyperparameters as `name value` lines, e.g. `U.0.length_scale.1.home 0.7`
/// and `U.0.season_gap_weeks 9.5`.
std::string hypers_to_text(const HyperSet& h, const KernelSpec& spec);
HyperSet hypers_from_text(const std::string& text, std::size_t K, const KernelSpec& spec);
void save_hypers(const std::filesystem::path& path, const HyperSet& h, const KernelSpec& spec);
HyperSet load_hypers(const std::filesystem::path& path, std::size_t K, const KernelSpec& spec);

/// Coordinate-wise median across chains.
HyperSet median_hypers(std::span<const ModelState> states);

/// Run metadata: config hash, seed, code version and the fixed modelling
/// choices, plus any command-specific entries in `extra`.
nlohmann::json run_metadata(const RunConfig& cfg, const std::string& command, const nlohmann::json& extra = {});

/// Writes text in one piece (binary mode, so output bytes are platform-independent).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dpmf
