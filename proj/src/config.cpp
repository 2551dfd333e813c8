#include "dpmf/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dpmf/data.hpp"
#include "dpmf/error.hpp"

namespace dpmf {

using nlohmann::json;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::PMF: return "PMF";
    case Variant::DPMF_t: return "DPMF_t";
    case Variant::DPMF_h: return "DPMF_h";
    case Variant::DPMF_th: return "DPMF_th";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::PMF, Variant::DPMF_t, Variant::DPMF_h, Variant::DPMF_th})
    if (s == variant_name(v)) return v;
  throw ConfigError("unknown model variant '" + s + "' (expected PMF, DPMF_t, DPMF_h or DPMF_th)");
}

namespace {

const char* shape_name(KernelShape k) { return k == KernelShape::Ard ? "ard" : "ard_periodic"; }

KernelShape parse_shape(const std::string& s) {
  if (s == "ard") return KernelShape::Ard;
  if (s == "ard_periodic") return KernelShape::ArdPeriodic;
  throw ConfigError("unknown kernel '" + s + "' (expected ard or ard_periodic)");
}

void check_box(const Box& b, const char* name, bool open_lo) {
  const bool ok = std::isfinite(b.lo) && std::isfinite(b.hi) && b.hi > b.lo && (open_lo ? b.lo >= 0.0 : b.lo > 0.0);
  if (!ok) throw ConfigError(std::string("invalid prior box for ") + name);
}

json box_json(const Box& b) { return json::array({b.lo, b.hi}); }

Box box_from(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(name) + " must be a [lo, hi] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void RunConfig::validate() const {
  if (K < 1) throw ConfigError("K must be at least 1");
  schedule.validate();
  if (threads < 1) throw ConfigError("threads must be at least 1");
  check_box(time_box, "time length scale", false);
  check_box(home_box, "home length scale", false);
  check_box(periodic_box, "periodic length scale", false);
  check_box(gap_box, "season gap", true);
  if (!(true_gap_weeks > 0.0)) throw ConfigError("true_gap_weeks must be positive");
  if (gap_box.hi > true_gap_weeks) throw ConfigError("season gap box must lie inside (0, true_gap_weeks]");
  if (!(period_weeks > 0.0)) throw ConfigError("period_weeks must be positive");
  if (!(mean_prior_sd > 0.0)) throw ConfigError("mean_prior_sd must be positive");
  if (!(init.nu_scale > 0.0) || !(std::abs(init.rho) < 1.0)) throw ConfigError("invalid initialization settings");
  if (init.sigma && !(*init.sigma > 0.0)) throw ConfigError("initial sigma must be positive");
  if (!(block_weeks > 0.0) || previous_seasons < 0) throw ConfigError("invalid rolling block settings");
  if (!(grid_hi > grid_lo) || !(grid_step > 0.0)) throw ConfigError("invalid density grid");
  for (const auto& m : models)
    if (m.K < 1) throw ConfigError("model grid entries need K >= 1");
}

std::vector<ModelChoice> RunConfig::model_grid() const {
  if (!models.empty()) return models;
  return {{variant, K}};
}

RunConfig RunConfig::with_model(const ModelChoice& m) const {
  RunConfig c = *this;
  c.variant = m.variant;
  c.K = m.K;
  c.models.clear();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["K"] = c.K;
  j["variant"] = variant_name(c.variant);
  j["kernel"] = shape_name(c.kernel);
  j["period_weeks"] = c.period_weeks;
  j["schedule"] = {{"n_chains", c.schedule.n_chains},
                   {"cold_burnin", c.schedule.cold_burnin},
                   {"warm_burnin", c.schedule.warm_burnin},
                   {"thin", c.schedule.thin},
                   {"keep_per_chain", c.schedule.keep_per_chain}};
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  j["time_box"] = box_json(c.time_box);
  j["home_box"] = box_json(c.home_box);
  j["periodic_box"] = box_json(c.periodic_box);
  j["gap_box"] = box_json(c.gap_box);
  j["true_gap_weeks"] = c.true_gap_weeks;
  j["share_season_gap"] = c.share_season_gap;
  j["mean_prior_sd"] = c.mean_prior_sd;
  j["init"] = {{"nu_scale", c.init.nu_scale}, {"rho", c.init.rho}};
  if (c.init.sigma) j["init"]["sigma"] = *c.init.sigma;
  j["block_weeks"] = c.block_weeks;
  j["previous_seasons"] = c.previous_seasons;
  j["evaluate_seasons"] = c.evaluate_seasons;
  j["models"] = json::array();
  for (const auto& m : c.models) j["models"].push_back({{"variant", variant_name(m.variant)}, {"K", m.K}});
  j["burn_seasons"] = c.burn_seasons;
  if (c.frozen_hypers) j["frozen_hypers"] = c.frozen_hypers->generic_string();
  j["grid"] = {{"lo", c.grid_lo}, {"hi", c.grid_hi}, {"step", c.grid_step}};
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "K") c.K = v.get<std::size_t>();
      else if (key == "variant") c.variant = parse_variant(v.get<std::string>());
      else if (key == "kernel") c.kernel = parse_shape(v.get<std::string>());
      else if (key == "period_weeks") c.period_weeks = v.get<double>();
      else if (key == "schedule") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "n_chains") c.schedule.n_chains = sv.get<int>();
          else if (sk == "cold_burnin") c.schedule.cold_burnin = sv.get<int>();
          else if (sk == "warm_burnin") c.schedule.warm_burnin = sv.get<int>();
          else if (sk == "thin") c.schedule.thin = sv.get<int>();
          else if (sk == "keep_per_chain") c.schedule.keep_per_chain = sv.get<int>();
          else throw ConfigError("unknown schedule key '" + sk + "'");
        }
      } else if (key == "threads") c.threads = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "time_box") c.time_box = box_from(v, "time_box");
      else if (key == "home_box") c.home_box = box_from(v, "home_box");
      else if (key == "periodic_box") c.periodic_box = box_from(v, "periodic_box");
      else if (key == "gap_box") c.gap_box = box_from(v, "gap_box");
      else if (key == "true_gap_weeks") c.true_gap_weeks = v.get<double>();
      else if (key == "share_season_gap") c.share_season_gap = v.get<bool>();
      else if (key == "mean_prior_sd") c.mean_prior_sd = v.get<double>();
      else if (key == "init") {
        for (const auto& [ik, iv] : v.items()) {
          if (ik == "nu_scale") c.init.nu_scale = iv.get<double>();
          else if (ik == "rho") c.init.rho = iv.get<double>();
          else if (ik == "sigma") c.init.sigma = iv.get<double>();
          else throw ConfigError("unknown init key '" + ik + "'");
        }
      } else if (key == "block_weeks") c.block_weeks = v.get<double>();
      else if (key == "previous_seasons") c.previous_seasons = v.get<int>();
      else if (key == "evaluate_seasons") c.evaluate_seasons = v.get<std::vector<int>>();
      else if (key == "models") {
        for (const auto& m : v) {
          ModelChoice mc;
          mc.variant = parse_variant(m.at("variant").get<std::string>());
          mc.K = m.at("K").get<std::size_t>();
          c.models.push_back(mc);
        }
      } else if (key == "burn_seasons") c.burn_seasons = v.get<std::vector<int>>();
      else if (key == "frozen_hypers") c.frozen_hypers = v.get<std::string>();
      else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "lo") c.grid_lo = gv.get<double>();
          else if (gk == "hi") c.grid_hi = gv.get<double>();
          else if (gk == "step") c.grid_step = gv.get<double>();
          else throw ConfigError("unknown grid key '" + gk + "'");
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config ") + path.string() + ": " + e.what(), 0);
  }
  return config_from_json(j);
}

KernelSpec kernel_for(const RunConfig& cfg) {
  std::vector<int> dims;
  switch (cfg.variant) {
    case Variant::PMF:
    case Variant::DPMF_th: dims = {kTimeDim, kHomeDim}; break;
    case Variant::DPMF_t: dims = {kTimeDim}; break;
    case Variant::DPMF_h: dims = {kHomeDim}; break;
  }
  KernelSpec ard = KernelSpec::ard(dims);
  if (cfg.kernel == KernelShape::ArdPeriodic && cfg.variant != Variant::PMF && cfg.variant != Variant::DPMF_h)
    return KernelSpec::product({ard, KernelSpec::periodic(kTimeDim, cfg.period_weeks)});
  return ard;
}

std::vector<Box> length_scale_boxes(const RunConfig& cfg) {
  const KernelSpec spec = kernel_for(cfg);
  std::vector<Box> boxes;
  // Periodic factors consume their length scale after the ARD ones.
  std::size_t ard_count = spec.family == KernelFamily::Product ? spec.factors[0].num_length_scales()
                                                              : spec.num_length_scales();
  const auto dims = spec.length_scale_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i >= ard_count) boxes.push_back(cfg.periodic_box);
    else boxes.push_back(dims[i] == kTimeDim ? cfg.time_box : cfg.home_box);
  }
  return boxes;
}

bool samples_hypers(const RunConfig& cfg) { return cfg.variant != Variant::PMF; }

Model build_model(const RunConfig& cfg, std::span<const GameRecord> games, std::span<const std::size_t> keys,
                  const std::vector<std::string>& teams, const SeasonCalendar& calendar) {
  ModelSpec spec;
  spec.K = cfg.K;
  spec.kernel = kernel_for(cfg);
  spec.calendar = calendar;
  spec.calendar.true_gap_weeks = cfg.true_gap_weeks;
  spec.share_season_gap = cfg.share_season_gap;

  double sum = 0.0;
  for (const auto& g : games) sum += g.home_score + g.away_score;
  const double mean_score = games.empty() ? 100.0 : sum / (2.0 * static_cast<double>(games.size()));

  Priors pr;
  const auto centers = Priors::mean_centers(mean_score, cfg.K);
  pr.mean_center_u = centers[0];
  pr.mean_center_v = centers[1];
  pr.mean_sd = cfg.mean_prior_sd;
  pr.length_scale_box = length_scale_boxes(cfg);
  pr.gap_box = cfg.gap_box;
  return Model(teams.size(), to_model_games(games, teams, keys), spec, pr);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace dpmf
