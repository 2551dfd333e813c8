#include "dpmf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpmf/checkpoint.hpp"
#include "dpmf/error.hpp"

namespace dpmf {

using nlohmann::json;

namespace {

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
  return std::filesystem::path(p.string() + suffix);
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::vector<FixtureRecord> parse_fixtures_csv(const std::string& text) {
  std::vector<FixtureRecord> out;
  std::size_t pos = 0;
  long line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (header) {
      if (f != std::vector<std::string>{"date", "home_team", "away_team"})
        throw ParseError("fixtures header must be 'date,home_team,away_team'", line_no);
      header = false;
      continue;
    }
    if (f.size() != 3) throw ParseError("expected 3 fields", line_no);
    FixtureRecord r;
    try {
      r.date = parse_date(f[0]);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.home_team = f[1];
    r.away_team = f[2];
    if (r.home_team.empty() || r.away_team.empty() || r.home_team == r.away_team)
      throw ValidationError("fixture on line " + std::to_string(line_no) + " needs two distinct teams");
    out.push_back(std::move(r));
  }
  if (header) throw ParseError("empty fixtures file", 0);
  return out;
}

void cmd_fit(const RunConfig& cfg, const std::filesystem::path& data, bool burn_hypers, const FitOutputs& outputs) {
  const auto games = load_games(data);
  std::vector<std::vector<std::string>> trace_rows(static_cast<std::size_t>(cfg.schedule.n_chains));
  std::function<void(int, int, const ModelState&)> observer;
  if (outputs.trace) {
    // Each chain appends to its own row list, so the file order does not
    // depend on thread scheduling.
    observer = [&trace_rows](int chain, int iter, const ModelState& st) {
      std::string row = std::to_string(chain) + "," + std::to_string(iter);
      for (const auto& side : st.sides)
        for (const auto& hp : side.hypers) {
          for (double ls : hp.length_scales) row += "," + fmt("%.17g", ls);
          row += "," + fmt("%.17g", hp.season_gap_weeks);
        }
      row += "," + fmt("%.17g", st.lik.sigma) + "," + fmt("%.17g", st.lik.rho);
      trace_rows[static_cast<std::size_t>(chain)].push_back(std::move(row));
    };
  }
  const FitResult fit = fit_games(cfg, games, burn_hypers, observer);

  Checkpoint cp;
  cp.config = cfg;
  cp.epoch = fit.games.front().date - std::chrono::days(static_cast<long>(std::llround(fit.games.front().week * 7.0)));
  cp.teams = fit.teams;
  cp.calendar = fit.calendar;
  cp.games = fit.games;
  cp.hyper_mode = fit.hyper_mode;
  cp.frozen = fit.start_hypers;
  cp.states = fit.run.final_states;
  cp.rngs = fit.run.final_rngs;

  const KernelSpec spec = kernel_for(cfg);
  save_checkpoint(outputs.checkpoint, cp);
  json extra = {{"data", data.filename().generic_string()},
                {"training_games", fit.games.size()},
                {"chains", cp.states.size()},
                {"burn_hypers", burn_hypers},
                {"hyper_mode", fit.hyper_mode == HyperMode::Frozen ? "frozen" : "sample"}};
  if (burn_hypers && outputs.hypers) {
    save_hypers(*outputs.hypers, median_hypers(cp.states), spec);
    extra["hypers_file"] = outputs.hypers->filename().generic_string();
  }
  if (outputs.trace) {
    std::string text = "chain,iteration";
    for (const auto& n : hyper_names(cfg.K, spec)) text += "," + n;
    text += ",sigma,rho\n";
    for (const auto& rows : trace_rows)
      for (const auto& row : rows) text += row + "\n";
    write_text_file(*outputs.trace, text);
  }
  write_json(outputs.metadata, run_metadata(cfg, "fit", extra));
}

void cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& fixtures_path,
                 const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                 std::optional<std::array<double, 3>> grid) {
  Checkpoint cp = load_checkpoint(checkpoint);
  RunConfig cfg = cp.config;
  if (seed) cfg.seed = *seed;
  if (grid) {
    cfg.grid_lo = (*grid)[0];
    cfg.grid_hi = (*grid)[1];
    cfg.grid_step = (*grid)[2];
  }
  cfg.validate();

  const auto records = parse_fixtures_csv(read_text_file(fixtures_path));
  std::vector<Fixture> fixtures;
  for (const auto& r : records) {
    const double week = static_cast<double>((r.date - cp.epoch).count()) / 7.0;
    if (week < 0.0) throw DomainError("fixture date " + format_date(r.date) + " precedes the data epoch");
    fixtures.push_back({team_index(cp.teams, r.home_team), team_index(cp.teams, r.away_team), week});
  }

  std::vector<std::size_t> keys(cp.games.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i;
  const Model model = build_model(cfg, cp.games, keys, cp.teams, cp.calendar);
  for (const auto& st : cp.states) st.validate(model);
  if (cp.states.size() != static_cast<std::size_t>(cfg.schedule.n_chains))
    throw ValidationError("checkpoint chain count does not match its schedule");

  RunOptions opts;
  opts.init = cfg.init;
  opts.seed = cfg.seed;
  opts.stream = 1;
  opts.threads = cfg.threads;
  const HyperSet hypers = cp.hyper_mode == HyperMode::Frozen ? cp.frozen : hypers_of(cp.states.front());
  const BlockRun run = run_block(model, &cp.states, fixtures, cfg.schedule, cp.hyper_mode, hypers, opts);

  const auto n_grid = static_cast<std::size_t>(std::floor((cfg.grid_hi - cfg.grid_lo) / cfg.grid_step + 1e-9)) + 1;
  std::vector<double> axis(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) axis[i] = cfg.grid_lo + cfg.grid_step * static_cast<double>(i);

  json j;
  j["schema_version"] = 1;
  j["grid"] = {{"lo", cfg.grid_lo}, {"hi", cfg.grid_hi}, {"step", cfg.grid_step}, {"axis", axis},
               {"layout", "density[i][j] at home score axis[i], away score axis[j]"}};
  j["fixtures"] = json::array();
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const PredictiveMixture mix = run.bank.mixture(f);
    json comps = json::array();
    for (const auto& c : mix.components())
      comps.push_back({{"mean_home", c.mean[0]}, {"mean_away", c.mean[1]}, {"sigma", c.lik.sigma}, {"rho", c.lik.rho}});
    json density = json::array();
    for (double h : axis) {
      json row = json::array();
      for (double a : axis) row.push_back(std::exp(mix.logpdf({h, a})));
      density.push_back(std::move(row));
    }
    const ScorePair mean = mix.mean();
    j["fixtures"].push_back({{"date", format_date(records[f].date)},
                             {"home_team", records[f].home_team},
                             {"away_team", records[f].away_team},
                             {"week", fixtures[f].week},
                             {"mean_home", mean[0]},
                             {"mean_away", mean[1]},
                             {"prob_home_wins", mix.prob_first_wins()},
                             {"components", std::move(comps)},
                             {"density", std::move(density)}});
  }
  write_json(out, j);
  write_json(sibling(out, ".meta.json"),
             run_metadata(cfg, "predict",
                          {{"checkpoint", checkpoint.filename().generic_string()},
                           {"fixtures", fixtures.size()},
                           {"mixture_components", run.bank.size()}}));
}

void cmd_evaluate_rolling(const RunConfig& cfg, const std::filesystem::path& data, const std::filesystem::path& out_dir,
                          std::ostream* progress) {
  const auto games = load_games(data);
  ProgressFn fn;
  if (progress) fn = [progress](const std::string& s) { *progress << s << "\n"; };
  const RollingReport report = evaluate_rolling(cfg, games, fn);
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "blocks.csv", blocks_csv(report));
  write_text_file(out_dir / "aggregate.csv", aggregate_csv(report));
  write_text_file(out_dir / "table.txt", report_table(report));
  std::size_t tests = 0;
  for (const auto& b : report.blocks) tests += b.metrics.games;
  write_json(out_dir / "metadata.json",
             run_metadata(cfg, "evaluate-rolling",
                          {{"data", data.filename().generic_string()},
                           {"blocks", report.blocks.size()},
                           {"test_games", tests},
                           {"expert_row", !report.expert.empty()}}));
}

void cmd_synth(const SynthConfig& cfg, const std::filesystem::path& out, const std::filesystem::path& truth) {
  const SynthResult r = synth_generate(cfg);
  save_games(out, r.games);
  json j;
  j["seed"] = r.config.seed;
  j["K"] = r.config.K;
  j["n_teams"] = r.config.n_teams;
  j["n_seasons"] = r.config.n_seasons;
  j["season_weeks"] = r.config.season_weeks;
  j["true_gap_weeks"] = r.config.true_gap_weeks;
  j["start_date"] = r.config.start_date;
  j["sigma"] = r.config.sigma;
  j["rho"] = r.config.rho;
  auto hyp = [](const std::vector<HyperParams>& hs) {
    json a = json::array();
    for (const auto& h : hs) a.push_back({{"length_scales", h.length_scales}, {"season_gap_weeks", h.season_gap_weeks}});
    return a;
  };
  auto mat = [](const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      a.push_back(std::move(row));
    }
    return a;
  };
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["U"] = {{"hypers", hyp(r.config.hypers_u)}, {"chol_sigma", mat(r.config.chol_sigma_u)}, {"mean", vec(r.config.mean_u)}};
  j["V"] = {{"hypers", hyp(r.config.hypers_v)}, {"chol_sigma", mat(r.config.chol_sigma_v)}, {"mean", vec(r.config.mean_v)}};
  json expected = json::array();
  for (const auto& e : r.expected) expected.push_back({e[0], e[1]});
  j["expected_scores"] = std::move(expected);
  json sites = json::array();
  for (const auto& s : r.sites)
    sites.push_back({{"team", s.team}, {"game", s.game}, {"week", s.week}, {"is_home", s.is_home},
                     {"f_u", s.f_u}, {"f_v", s.f_v}, {"u", s.u}, {"v", s.v}});
  j["sites"] = std::move(sites);
  write_json(truth, j);
}

std::string cmd_expert_baseline(const std::filesystem::path& data, const std::filesystem::path& out) {
  const auto games = load_games(data);
  std::string csv = "date,season,home_team,away_team,home_score,away_score,expert_home,expert_away\n";
  std::vector<std::size_t> all(games.size());
  std::vector<int> seasons;
  for (std::size_t i = 0; i < games.size(); ++i) {
    all[i] = i;
    const auto& g = games[i];
    if (seasons.empty() || seasons.back() != g.season) seasons.push_back(g.season);
    const auto e = expert_scores(g);
    csv += format_date(g.date) + "," + std::to_string(g.season) + "," + g.home_team + "," + g.away_team + "," +
           fmt("%.17g", g.home_score) + "," + fmt("%.17g", g.away_score) + "," +
           (e ? fmt("%.17g", (*e)[0]) + "," + fmt("%.17g", (*e)[1]) : std::string(",")) + "\n";
  }
  std::sort(seasons.begin(), seasons.end());
  seasons.erase(std::unique(seasons.begin(), seasons.end()), seasons.end());
  write_text_file(out, csv);
  const auto rows = expert_rows(games, all, seasons);
  std::string summary = "season,games,winner_error,rmse\n";
  for (const auto& r : rows)
    summary += (r.season ? std::to_string(*r.season) : std::string("all")) + "," + std::to_string(r.metrics.games) +
               "," + fmt("%.6f", r.metrics.winner_error) + "," + fmt("%.6f", r.metrics.rmse) + "\n";
  write_text_file(sibling(out, ".summary.csv"), summary);
  return summary;
}

namespace {

struct ConfigFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string variant;
  std::size_t K = 0;
  int chains = 0, cold = -1, warm = -1, thin = 0, keep = 0, threads = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "Run configuration (JSON)");
    seed_opt = app->add_option("--seed", seed, "Random seed");
    app->add_option("--variant", variant, "PMF, DPMF_t, DPMF_h or DPMF_th");
    app->add_option("--K", K, "Number of latent features");
    app->add_option("--chains", chains, "Number of chains");
    app->add_option("--cold-burnin", cold, "Burn-in sweeps after a cold start");
    app->add_option("--warm-burnin", warm, "Burn-in sweeps after a warm start");
    app->add_option("--thin", thin, "Sweeps between retained samples");
    app->add_option("--keep", keep, "Retained samples per chain");
    app->add_option("--threads", threads, "Worker threads");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (*seed_opt) c.seed = seed;
    if (!variant.empty()) c.variant = parse_variant(variant);
    if (K > 0) c.K = K;
    if (chains > 0) c.schedule.n_chains = chains;
    if (cold >= 0) c.schedule.cold_burnin = cold;
    if (warm >= 0) c.schedule.warm_burnin = warm;
    if (thin > 0) c.schedule.thin = thin;
    if (keep > 0) c.schedule.keep_per_chain = keep;
    if (threads > 0) c.threads = threads;
    c.validate();
    return c;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dependent probabilistic matrix factorization for paired game scores", "dpmf"};
  app.require_subcommand(1);

  ConfigFlags fit_flags;
  std::string fit_data, fit_out, fit_hypers, fit_trace;
  bool burn = false;
  auto* fit = app.add_subcommand("fit", "Run the sampler on a dataset and write a checkpoint");
  fit_flags.add(fit);
  fit->add_option("--data", fit_data, "Games CSV")->required();
  fit->add_option("--out", fit_out, "Checkpoint path")->required();
  fit->add_flag("--burn-hypers", burn, "Sample hyperparameters over burn_seasons and write the frozen file");
  fit->add_option("--hypers-out", fit_hypers, "Frozen hyperparameter file (default <out>.hypers.txt)");
  fit->add_option("--trace", fit_trace, "Per-sweep hyperparameter trace CSV");

  std::string pred_cp, pred_fix, pred_out;
  std::uint64_t pred_seed = 0;
  std::vector<double> pred_grid;
  auto* predict = app.add_subcommand("predict", "Predictive score densities for fixtures");
  predict->add_option("--checkpoint", pred_cp, "Checkpoint from fit")->required();
  predict->add_option("--fixtures", pred_fix, "Fixtures CSV (date,home_team,away_team)")->required();
  predict->add_option("--out", pred_out, "Output JSON")->required();
  auto* pred_seed_opt = predict->add_option("--seed", pred_seed, "Random seed (default: the checkpoint's)");
  predict->add_option("--grid", pred_grid, "Density grid: lo hi step")->expected(3);

  ConfigFlags eval_flags;
  std::string eval_data, eval_out;
  bool quiet = false;
  auto* eval = app.add_subcommand("evaluate-rolling", "Rolling censored-data evaluation");
  eval_flags.add(eval);
  eval->add_option("--data", eval_data, "Games CSV")->required();
  eval->add_option("--out-dir", eval_out, "Report directory")->required();
  eval->add_flag("--quiet", quiet, "No per-block progress lines");

  SynthConfig synth_cfg;
  std::string synth_out, synth_truth;
  auto* synth = app.add_subcommand("synth", "Generate games from the model");
  synth->add_option("--out", synth_out, "Games CSV")->required();
  synth->add_option("--truth", synth_truth, "Ground-truth JSON (default <out>.truth.json)");
  synth->add_option("--seed", synth_cfg.seed, "Random seed");
  synth->add_option("--K", synth_cfg.K, "Latent features");
  synth->add_option("--teams", synth_cfg.n_teams, "Number of teams");
  synth->add_option("--seasons", synth_cfg.n_seasons, "Number of seasons");
  synth->add_option("--season-weeks", synth_cfg.season_weeks, "Length of a season in weeks");
  synth->add_option("--start-date", synth_cfg.start_date, "First game date (YYYY-MM-DD)");
  synth->add_option("--mean-score", synth_cfg.mean_score, "Average score");
  synth->add_flag("--lines", synth_cfg.with_lines, "Add noisy betting lines");

  std::string exp_data, exp_out;
  auto* expert = app.add_subcommand("expert-baseline", "Score predictions implied by betting lines");
  expert->add_option("--data", exp_data, "Games CSV with lines")->required();
  expert->add_option("--out", exp_out, "Per-game predictions CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << category_name(ErrorCategory::Config) << ": " << e.what() << "\n";
    return exit_status(ErrorCategory::Config);
  }

  try {
    if (*fit) {
      const RunConfig cfg = fit_flags.resolve();
      FitOutputs o;
      o.checkpoint = fit_out;
      o.metadata = sibling(fit_out, ".meta.json");
      if (burn) o.hypers = fit_hypers.empty() ? sibling(fit_out, ".hypers.txt") : std::filesystem::path(fit_hypers);
      if (!fit_trace.empty()) o.trace = fit_trace;
      cmd_fit(cfg, fit_data, burn, o);
      out << "wrote " << fit_out << "\n";
    } else if (*predict) {
      std::optional<std::array<double, 3>> grid;
      if (!pred_grid.empty()) grid = std::array<double, 3>{pred_grid[0], pred_grid[1], pred_grid[2]};
      cmd_predict(pred_cp, pred_fix, pred_out, *pred_seed_opt ? std::optional(pred_seed) : std::nullopt, grid);
      out << "wrote " << pred_out << "\n";
    } else if (*eval) {
      const RunConfig cfg = eval_flags.resolve();
      cmd_evaluate_rolling(cfg, eval_data, eval_out, quiet ? nullptr : &err);
      out << read_text_file(std::filesystem::path(eval_out) / "table.txt");
    } else if (*synth) {
      cmd_synth(synth_cfg, synth_out, synth_truth.empty() ? sibling(synth_out, ".truth.json") : std::filesystem::path(synth_truth));
      out << "wrote " << synth_out << "\n";
    } else if (*expert) {
      out << cmd_expert_baseline(exp_data, exp_out);
    }
  } catch (const Error& e) {
    err << category_name(e.category()) << ": " << e.what() << "\n";
    return exit_status(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    err << category_name(ErrorCategory::Io) << ": " << e.what() << "\n";
    return exit_status(ErrorCategory::Io);
  }
  return 0;
}

}  // namespace dpmf
