#include "dpmf/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "dpmf/error.hpp"

namespace dpmf {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = vec_from(j[static_cast<std::size_t>(i)]);
    if (row.size() != n) throw ParseError("checkpoint: matrix is not square", 0);
    m.row(i) = row.transpose();
  }
  return m;
}

json hypers_json(const std::vector<HyperParams>& hs) {
  json a = json::array();
  for (const auto& h : hs) a.push_back({{"length_scales", h.length_scales}, {"season_gap_weeks", h.season_gap_weeks}});
  return a;
}

std::vector<HyperParams> hypers_from(const json& j) {
  std::vector<HyperParams> out;
  for (const auto& h : j)
    out.push_back({h.at("length_scales").get<std::vector<double>>(), h.at("season_gap_weeks").get<double>()});
  return out;
}

}  // namespace

std::vector<std::string> hyper_names(std::size_t K, const KernelSpec& spec) {
  std::vector<std::string> names;
  const auto dims = spec.length_scale_dims();
  for (Side s : kSides) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::string prefix = std::string(side_name(s)) + "." + std::to_string(k) + ".";
      for (std::size_t i = 0; i < dims.size(); ++i)
        names.push_back(prefix + "length_scale." + std::to_string(i) + "." + dim_name(dims[i]));
      names.push_back(prefix + "season_gap_weeks");
    }
  }
  return names;
}

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

json state_to_json(const ModelState& s) {
  json j;
  for (Side side : kSides) {
    const SideState& st = s.side(side);
    json nu = json::array();
    for (const auto& feature : st.nu) {
      json members = json::array();
      for (const auto& v : feature) members.push_back(vec_json(v));
      nu.push_back(std::move(members));
    }
    j[side_name(side)] = {{"nu", std::move(nu)},
                          {"chol_sigma", mat_json(st.chol_sigma)},
                          {"mean", vec_json(st.mean)},
                          {"hypers", hypers_json(st.hypers)}};
  }
  j["sigma"] = s.lik.sigma;
  j["rho"] = s.lik.rho;
  j["rng_seed"] = s.rng_seed;
  return j;
}

ModelState state_from_json(const json& j) {
  ModelState s;
  try {
    for (Side side : kSides) {
      const json& js = j.at(side_name(side));
      SideState& st = s.side(side);
      for (const auto& feature : js.at("nu")) {
        std::vector<Eigen::VectorXd> members;
        for (const auto& v : feature) members.push_back(vec_from(v));
        st.nu.push_back(std::move(members));
      }
      st.chol_sigma = mat_from(js.at("chol_sigma"));
      st.mean = vec_from(js.at("mean"));
      st.hypers = hypers_from(js.at("hypers"));
    }
    s.lik = {j.at("sigma").get<double>(), j.at("rho").get<double>()};
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint state: ") + e.what(), 0);
  }
  return s;
}

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  Rng rng;
  is >> rng;
  if (is.fail()) throw ParseError("checkpoint: malformed rng state", 0);
  return rng;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  json j;
  j["schema_version"] = kCheckpointSchema;
  j["code_version"] = kCodeVersion;
  j["config"] = to_json(cp.config);
  j["epoch"] = format_date(cp.epoch);
  j["teams"] = cp.teams;
  json bounds = json::array();
  for (const auto& b : cp.calendar.boundaries) bounds.push_back({b.season_end_week, b.next_season_start_week});
  j["calendar"] = {{"boundaries", bounds}, {"true_gap_weeks", cp.calendar.true_gap_weeks}};
  j["games_csv"] = games_to_csv(cp.games);
  j["hyper_mode"] = cp.hyper_mode == HyperMode::Frozen ? "frozen" : "sample";
  if (cp.hyper_mode == HyperMode::Frozen)
    j["frozen_hypers"] = {{"U", hypers_json(cp.frozen.sides[0])}, {"V", hypers_json(cp.frozen.sides[1])}};
  json chains = json::array();
  for (std::size_t c = 0; c < cp.states.size(); ++c)
    chains.push_back({{"state", state_to_json(cp.states[c])}, {"rng", rng_to_string(cp.rngs.at(c))}});
  j["chains"] = std::move(chains);
  write_text_file(path, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what(), 0);
  }
  Checkpoint cp;
  try {
    const int schema = j.at("schema_version").get<int>();
    if (schema != kCheckpointSchema)
      throw ParseError("checkpoint schema " + std::to_string(schema) + " is not supported", 0);
    cp.config = config_from_json(j.at("config"));
    cp.epoch = parse_date(j.at("epoch").get<std::string>());
    cp.teams = j.at("teams").get<std::vector<std::string>>();
    for (const auto& b : j.at("calendar").at("boundaries"))
      cp.calendar.boundaries.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    cp.calendar.true_gap_weeks = j.at("calendar").at("true_gap_weeks").get<double>();
    cp.games = parse_games_csv(j.at("games_csv").get<std::string>(), cp.epoch);
    const std::string mode = j.at("hyper_mode").get<std::string>();
    if (mode == "frozen") {
      cp.hyper_mode = HyperMode::Frozen;
      cp.frozen.sides[0] = hypers_from(j.at("frozen_hypers").at("U"));
      cp.frozen.sides[1] = hypers_from(j.at("frozen_hypers").at("V"));
    } else if (mode != "sample") {
      throw ParseError("checkpoint: unknown hyper_mode '" + mode + "'", 0);
    }
    for (const auto& c : j.at("chains")) {
      cp.states.push_back(state_from_json(c.at("state")));
      cp.rngs.push_back(rng_from_string(c.at("rng").get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what(), 0);
  }
  if (cp.states.empty()) throw ValidationError("checkpoint holds no chains");
  return cp;
}

std::string hypers_to_text(const HyperSet& h, const KernelSpec& spec) {
  const std::size_t K = h.sides[0].size();
  const auto names = hyper_names(K, spec);
  std::string out;
  std::size_t n = 0;
  for (Side s : kSides) {
    for (const auto& hp : h.sides[idx(s)]) {
      for (double ls : hp.length_scales) out += names.at(n++) + " " + format_value(ls) + "\n";
      out += names.at(n++) + " " + format_value(hp.season_gap_weeks) + "\n";
    }
  }
  return out;
}

HyperSet hypers_from_text(const std::string& text, std::size_t K, const KernelSpec& spec) {
  std::map<std::string, double> values;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string name;
    double v = 0.0;
    if (!(ls >> name >> v)) throw ParseError("hyperparameter file: expected 'name value'", line_no);
    if (!values.emplace(name, v).second) throw ParseError("hyperparameter file: duplicate " + name, line_no);
  }
  const auto names = hyper_names(K, spec);
  for (const auto& [name, v] : values)
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ValidationError("hyperparameter file: unexpected entry " + name);
  const std::size_t n_ls = spec.num_length_scales();
  HyperSet h;
  std::size_t n = 0;
  auto take = [&]() {
    const auto it = values.find(names.at(n));
    if (it == values.end()) throw ValidationError("hyperparameter file: missing " + names.at(n));
    ++n;
    return it->second;
  };
  for (Side s : kSides) {
    for (std::size_t k = 0; k < K; ++k) {
      HyperParams hp;
      for (std::size_t i = 0; i < n_ls; ++i) hp.length_scales.push_back(take());
      hp.season_gap_weeks = take();
      h.sides[idx(s)].push_back(hp);
    }
  }
  return h;
}

void save_hypers(const std::filesystem::path& path, const HyperSet& h, const KernelSpec& spec) {
  write_text_file(path, hypers_to_text(h, spec));
}

HyperSet load_hypers(const std::filesystem::path& path, std::size_t K, const KernelSpec& spec) {
  return hypers_from_text(read_text_file(path), K, spec);
}

HyperSet median_hypers(std::span<const ModelState> states) {
  if (states.empty()) throw ValidationError("median of no states");
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  HyperSet out = hypers_of(states.front());
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t k = 0; k < out.sides[s].size(); ++k) {
      HyperParams& hp = out.sides[s][k];
      for (std::size_t i = 0; i < hp.length_scales.size(); ++i) {
        std::vector<double> v;
        for (const auto& st : states) v.push_back(st.sides[s].hypers[k].length_scales[i]);
        hp.length_scales[i] = median(v);
      }
      std::vector<double> g;
      for (const auto& st : states) g.push_back(st.sides[s].hypers[k].season_gap_weeks);
      hp.season_gap_weeks = median(g);
    }
  }
  return out;
}

json run_metadata(const RunConfig& cfg, const std::string& command, const json& extra) {
  json m;
  m["command"] = command;
  m["code_version"] = kCodeVersion;
  m["config_hash"] = hex64(config_hash(cfg));
  m["seed"] = cfg.seed;
  m["config"] = to_json(cfg);
  m["choices"] = {
      {"length_scale_boxes", {{"time", {cfg.time_box.lo, cfg.time_box.hi}}, {"home", {cfg.home_box.lo, cfg.home_box.hi}}}},
      {"season_gap_box", {cfg.gap_box.lo, cfg.gap_box.hi}},
      {"season_gap_shared", cfg.share_season_gap},
      {"length_scale_sampling", "slice sampler on log scale, top-hat prior with log Jacobian"},
      {"mean_prior", "normal centred at (sqrt(ybar/K), softplus^-1(sqrt(ybar/K))), sd " + std::to_string(cfg.mean_prior_sd)},
      {"cov_factor_prior", "log diagonal N(0, 1.5^2), off-diagonal N(0, 1)"},
      {"likelihood_prior", "log sigma N(0, 1.5^2), atanh rho N(0, 1.5^2)"},
      {"cold_start", "nu ~ N(0, nu_scale^2), means at prior centres, Sigma = I, sigma = empirical score sd, rho = init.rho"},
      {"warm_start", "whitened values carried over, new sites drawn N(0,1); cold start at season boundaries"},
      {"pmf_baseline", "length scales pinned at the top of their boxes"},
      {"winner_rule", "home predicted to win iff mixture P(home > away) > 0.5"},
      {"rmse", "pooled over both score entries of every game"},
      {"rolling_blocks", "blocks start at each season's first game; short final block kept; blocks without training data skipped"},
      {"expert_zero_spread", "predicts the home team"},
      {"predictive_conditioning", "each member's own training sites only"},
      {"simd", "runtime-selected kernels, scalar reference always available"},
  };
  if (!extra.is_null()) m["run"] = extra;
  return m;
}

}  // namespace dpmf
