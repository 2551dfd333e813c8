#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpmf/driver.hpp"
#include "dpmf/kernels.hpp"
#include "dpmf/model.hpp"

namespace dpmf {

enum class Variant { PMF, DPMF_t, DPMF_h, DPMF_th };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);  // throws ConfigError

/// Kernel shape shared by all 2K feature kernels.
enum class KernelShape {
  Ard,          // squared exponential over the variant's dimensions
  ArdPeriodic,  // the same times a periodic kernel on time
};

/// One model in an evaluation grid.
struct ModelChoice {
  Variant variant = Variant::DPMF_th;
  std::size_t K = 1;
};

struct RunConfig {
  std::size_t K = 1;
  Variant variant = Variant::DPMF_th;
  KernelShape kernel = KernelShape::Ard;
  double period_weeks = 52.0;

  ChainSchedule schedule;
  int threads = 1;
  std::uint64_t seed = 1;

  Box time_box{0.25, 500.0};
  Box home_box{0.01, 100.0};
  Box periodic_box{0.05, 20.0};
  Box gap_box{0.0, 28.0};
  double true_gap_weeks = 28.0;
  bool share_season_gap = true;
  double mean_prior_sd = 5.0;

  InitConfig init;

  // Rolling evaluation.
  double block_weeks = 4.0;
  int previous_seasons = 2;
  std::vector<int> evaluate_seasons;  // empty: every season
  std::vector<ModelChoice> models;    // empty: {variant, K}

  // Hyperparameter pre-burn: seasons whose games a `fit --burn-hypers`
  // run trains on (empty: all), and an optional frozen file to reuse.
  std::vector<int> burn_seasons;
  std::optional<std::filesystem::path> frozen_hypers;

  // Predictive density grid for `predict`.
  double grid_lo = 60.0;
  double grid_hi = 160.0;
  double grid_step = 2.0;

  void validate() const;
  std::vector<ModelChoice> model_grid() const;
  /// Copy with variant and K replaced.
  RunConfig with_model(const ModelChoice& m) const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);  // unknown keys are errors
RunConfig load_config(const std::filesystem::path& path);

/// Kernel for a variant: time and/or home dimensions; PMF keeps both
/// dimensions so its pinned length scales still parameterize a valid kernel.
KernelSpec kernel_for(const RunConfig& cfg);
std::vector<Box> length_scale_boxes(const RunConfig& cfg);
/// Whether hyperparameters are sampled (false for PMF, which stays pinned).
bool samples_hypers(const RunConfig& cfg);

/// Builds the model for `games`, which must be a subset of the dataset used
/// for `teams` and `calendar`. Mean prior centres follow the training mean.
Model build_model(const RunConfig& cfg, std::span<const struct GameRecord> games,
                  std::span<const std::size_t> keys, const std::vector<std::string>& teams,
                  const SeasonCalendar& calendar);

/// 64-bit FNV-1a of the canonical JSON form of the config.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hex64(std::uint64_t v);

inline constexpr const char* kCodeVersion = "dpmf 0.1.0";

}  // namespace dpmf
