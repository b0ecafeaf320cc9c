#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vgne/builtins.hpp"
#include "vgne/diagnostics.hpp"
#include "vgne/error.hpp"
#include "vgne/game_io.hpp"
#include "vgne/harness.hpp"
#include "vgne/oracles.hpp"
#include "vgne/schedules.hpp"

namespace fs = std::filesystem;
using namespace vgne;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string vec_str(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + short_num(v(k));
  return s + "]";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

Vector parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + cell + "'");
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct GameOptions {
  std::string name = "paper-example";
  std::uint64_t seed = 0;
  std::string file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--game", name, "Builtin game: paper-example, softplus-coupled, random-quadratic")
        ->capture_default_str();
    cmd->add_option("--game-seed", seed, "Seed for random-quadratic")->capture_default_str();
    cmd->add_option("--game-file", file, "Game definition file (JSON, // comments allowed)");
  }

  GameSpec load() const { return file.empty() ? make_builtin(name, seed) : load_game(file); }
};

struct LearnOptions {
  GameOptions game;
  std::string config;
  double G = 1.0, g = 4.0 / 7.0, E = 1.0, e = 2.0 / 7.0, S = 1.0, s = 4.0 / 7.0;
  long T = 100'000;
  int num_seeds = 1;
  std::uint64_t seed_base = 0;
  long record_every = 0;
  std::string out = "learn.csv";
  bool allow_invalid = false;
  int workers = 0;
};

int cmd_learn(const LearnOptions& o, const CLI::App& cmd) {
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };

  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig(o.game.load()) : load_experiment(o.config);
  if (!o.config.empty() && (given("--game") || given("--game-file") || given("--game-seed")))
    cfg.game = o.game.load();
  if (o.config.empty() || given("--G")) cfg.schedules.G = o.G;
  if (o.config.empty() || given("--g")) cfg.schedules.g = o.g;
  if (o.config.empty() || given("--E")) cfg.schedules.E = o.E;
  if (o.config.empty() || given("--e")) cfg.schedules.e = o.e;
  if (o.config.empty() || given("--S")) cfg.schedules.S = o.S;
  if (o.config.empty() || given("--s")) cfg.schedules.s = o.s;
  if (o.config.empty() || given("-T")) cfg.T = o.T;
  if (o.config.empty() || given("--seeds") || given("--seed-base")) cfg.seeds = seed_range(o.seed_base, o.num_seeds);
  if (o.config.empty() || given("--record-every")) cfg.record_every = o.record_every;
  if (o.config.empty() || given("--workers")) cfg.workers = o.workers;
  if (o.allow_invalid) cfg.allow_invalid_schedules = true;

  if (o.config.empty() || given("--out")) {
    const fs::path out(o.out);
    cfg.output_dir = out.has_parent_path() ? out.parent_path().string() : ".";
    cfg.label = out.stem().string();
  } else if (cfg.output_dir.empty()) {
    cfg.output_dir = ".";
  }
  cfg.output_dir = resolve_output_dir(cfg.output_dir);

  const ScheduleReport report = validate_schedules(cfg.schedules);
  if (!report.valid()) {
    std::cerr << (cfg.allow_invalid_schedules ? "warning: " : "error: ")
              << "schedules violate the convergence conditions:\n";
    for (const auto& f : report.failures()) std::cerr << "  " << f << "\n";
    if (!cfg.allow_invalid_schedules) return 1;
  }

  const ExperimentResult res = run_experiment(cfg);
  const AggregateRow& last = res.table.rows.back();
  std::cout << "game " << cfg.game.name() << ", T = " << cfg.T << ", seeds = " << cfg.seeds.size() << "\n"
            << "predicted exponent of E||mu(t) - a*||^2: " << short_num(report.predicted_exponent)
            << (report.valid() ? "" : " (schedules invalid)") << "\n"
            << "mean err_primal_sq at t = " << last.t << ": " << short_num(last.mean_err_primal_sq) << " +/- "
            << short_num(last.stderr_err_primal_sq) << "\n"
            << "mean err_dual_sq   at t = " << last.t << ": " << short_num(last.mean_err_dual_sq) << " +/- "
            << short_num(last.stderr_err_dual_sq) << "\n";
  const auto [t_min, t_max] = default_fit_window(cfg.T);
  try {
    const RateFit fit = fit_rate(res.table.rows, t_min, t_max);
    std::cout << "fitted slope over [" << short_num(t_min) << ", " << short_num(t_max) << "]: " << short_num(fit.slope)
              << " (R^2 = " << short_num(fit.r_squared) << ")\n";
  } catch (const Error&) {
    // Too few checkpoints in the default window for a fit.
  }
  std::cout << "wrote " << res.table.raw_csv << "\n"
            << "wrote " << res.table.aggregate_csv << "\n";
  return 0;
}

struct OracleOptions {
  GameOptions game;
  std::optional<double> eps;
  std::string csv;
  std::string format = "text";
};

int cmd_oracle(const OracleOptions& o) {
  const GameSpec game = o.game.load();
  Vector primal, dual;
  std::vector<int> active;
  double stat = 0.0, comp = 0.0, feas = 0.0;
  if (o.eps) {
    const RegularizedSolution sol = game.quadratic() ? solve_regularized_vi(game, *o.eps)
                                                     : solve_regularized_vi_extragradient(game, *o.eps);
    primal = sol.primal.flat();
    dual = sol.dual;
    active = sol.active_set;
    stat = sol.stationarity_residual;
    comp = sol.complementarity_residual;
  } else if (game.quadratic()) {
    const OracleSolution sol = solve_vgne(game);
    primal = sol.primal.flat();
    dual = sol.dual;
    active = sol.active_set;
    stat = sol.stationarity_residual;
    comp = sol.complementarity_residual;
    feas = sol.feasibility_residual;
  } else {
    const RegularizedSolution sol = solve_regularized_vi_extragradient(game, 0.0);
    primal = sol.primal.flat();
    dual = sol.dual;
    active = sol.active_set;
    stat = sol.stationarity_residual;
    comp = sol.complementarity_residual;
  }
  if (o.eps || !game.quadratic()) {
    const Vector gv = constraint_value(game.constraints(), primal);
    feas = gv.size() ? std::max(0.0, gv.maxCoeff()) : 0.0;
  }

  auto write_csv = [&](std::ostream& out) {
    out << "quantity,index,value\n";
    for (Eigen::Index k = 0; k < primal.size(); ++k) out << "primal," << k << ',' << num(primal(k)) << '\n';
    for (Eigen::Index k = 0; k < dual.size(); ++k) out << "dual," << k << ',' << num(dual(k)) << '\n';
    for (int j : active) out << "active," << j << ",1\n";
    out << "stationarity_residual,," << num(stat) << '\n'
        << "complementarity_residual,," << num(comp) << '\n'
        << "feasibility_residual,," << num(feas) << '\n';
    if (o.eps) out << "epsilon,," << num(*o.eps) << '\n';
  };

  if (o.format == "csv") {
    write_csv(std::cout);
  } else {
    std::string act = "{";
    for (std::size_t k = 0; k < active.size(); ++k) act += (k ? ", " : "") + std::to_string(active[k]);
    act += "}";
    std::cout << "game: " << game.name() << (o.eps ? " (regularized, eps = " + short_num(*o.eps) + ")" : "") << "\n"
              << "a*      = " << vec_str(primal) << "\n"
              << "lambda* = " << vec_str(dual) << "\n"
              << "active set: " << act << "\n"
              << "stationarity residual:    " << short_num(stat) << "\n"
              << "complementarity residual: " << short_num(comp) << "\n"
              << "feasibility residual:     " << short_num(feas) << "\n";
  }
  if (!o.csv.empty()) {
    std::ofstream out = open_out(o.csv);
    write_csv(out);
  }
  return 0;
}

const std::vector<std::string> kChecks = {"regularization-path", "regularization-drift", "operator-inequalities",
                                          "estimator-mean",      "second-moment-growth", "sampling-perturbation",
                                          "smoothing-bias-order"};

struct DiagnoseOptions {
  GameOptions game;
  std::vector<std::string> checks;
  std::uint64_t seed = 1;
  long samples = 100'000;
  double sigma = 0.1;
  std::string mu, lambda;
  int pairs = 1000;
  double E = 1.0, e = 2.0 / 7.0;
  long t_last = 200;
  std::string csv;
};

int cmd_diagnose(const DiagnoseOptions& o) {
  const GameSpec game = o.game.load();
  SmoothingProbe probe{JointAction::zeros(game.layout()), Vector::Zero(game.num_constraints()), o.sigma, o.samples,
                       o.seed};
  if (!o.mu.empty()) probe.mu = JointAction(game.layout(), parse_vector(o.mu, "--mu"));
  if (!o.lambda.empty()) probe.lambda = parse_vector(o.lambda, "--lambda");
  probe.validate(game);

  const std::vector<std::string>& selected = o.checks.empty() ? kChecks : o.checks;
  LemmaReport all{"diagnose", {}};
  for (const auto& c : selected) {
    if ((c == "regularization-path" || c == "regularization-drift") && !game.quadratic()) {
      std::cerr << "skipping " << c << ": needs a quadratic game\n";
      continue;
    }
    if (c == "estimator-mean" && !game.quadratic()) {
      std::cerr << "skipping " << c << ": the estimate is biased for non-quadratic games (see smoothing-bias-order)\n";
      continue;
    }
    if (c == "smoothing-bias-order" && game.quadratic()) {
      std::cerr << "skipping " << c << ": the smoothing bias of a quadratic game is zero\n";
      continue;
    }
    if (c == "regularization-path") all.append(regularization_path_report(game, {1e-1, 1e-2, 1e-3, 1e-4}));
    else if (c == "regularization-drift") all.append(drift_boundedness_report(game, o.E, o.e, 2, o.t_last));
    else if (c == "operator-inequalities") all.append(operator_inequality_report(game, o.pairs, 0.1, o.seed));
    else if (c == "estimator-mean") all.append(estimator_unbiasedness_report(game, probe));
    else if (c == "second-moment-growth") all.append(second_moment_growth_report(game, probe));
    else if (c == "sampling-perturbation") all.append(s_term_report(game, probe));
    else if (c == "smoothing-bias-order") all.append(q_scaling_report(game, probe, {0.2, 0.1, 0.05, 0.025}));
  }

  auto write_csv = [&](std::ostream& out) {
    out << "lemma,case,statistic,bound,pass\n";
    for (const auto& c : all.checks)
      out << csv_cell(c.lemma) << ',' << csv_cell(c.case_name) << ',' << num(c.statistic) << ',' << num(c.bound) << ','
          << (c.pass ? "true" : "false") << '\n';
  };
  if (o.csv.empty()) {
    write_csv(std::cout);
  } else {
    std::ofstream out = open_out(o.csv);
    write_csv(out);
    for (const auto& c : all.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.lemma << "  " << c.case_name << "  " << short_num(c.statistic)
                << " vs " << short_num(c.bound) << (c.pass ? "" : "  [" + c.inputs + "]") << "\n";
  }
  return all.all_pass() ? 0 : 3;
}

struct RateFitOptions {
  std::string input;
  std::optional<double> t_min, t_max;
  std::string csv;
};

int cmd_rate_fit(const RateFitOptions& o) {
  const std::vector<AggregateRow> rows = read_aggregate_csv(o.input);
  if (rows.empty()) throw ConfigError("'" + o.input + "' has no rows");
  const auto [dmin, dmax] = default_fit_window(rows.back().t);
  const RateFit fit = fit_rate(rows, o.t_min.value_or(dmin), o.t_max.value_or(dmax));
  std::cout << "slope     " << num(fit.slope) << "\n"
            << "intercept " << num(fit.intercept) << "\n"
            << "window    [" << num(fit.t_min) << ", " << num(fit.t_max) << "], " << fit.points << " points\n"
            << "R^2       " << num(fit.r_squared) << "\n";
  if (!o.csv.empty()) {
    std::ofstream out = open_out(o.csv);
    out << "slope,intercept,t_min,t_max,r_squared,points\n"
        << num(fit.slope) << ',' << num(fit.intercept) << ',' << num(fit.t_min) << ',' << num(fit.t_max) << ','
        << num(fit.r_squared) << ',' << fit.points << '\n';
  }
  return 0;
}

int cmd_fig1(Fig1Options o) {
  o.output_dir = resolve_output_dir(o.output_dir);
  const Fig1Result res = reproduce_fig1(o);
  const auto [t_min, t_max] = default_fit_window(o.T);
  std::cout << "variant  final mean err_primal_sq  slope over [" << short_num(t_min) << ", " << short_num(t_max) << "]\n";
  for (const auto& v : res.variants) {
    std::string slope = "n/a";
    try {
      slope = short_num(fit_rate(v.rows, t_min, t_max).slope);
    } catch (const Error&) {
      // Constant or too-short series.
    }
    std::cout << v.label << "  " << short_num(v.rows.back().mean_err_primal_sq) << "  " << slope << "\n";
  }
  for (const auto& v : res.variants) std::cout << "wrote " << v.aggregate_csv << "\n";
  std::cout << "wrote " << res.plot_script << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payoff-based learning of variational generalized Nash equilibria"};
  app.require_subcommand(1);

  LearnOptions learn;
  CLI::App* c_learn = app.add_subcommand("learn", "Run the payoff-based learner over several seeds");
  learn.game.attach(c_learn);
  c_learn->add_option("--config", learn.config, "Experiment definition (JSON); flags given explicitly override it");
  c_learn->add_option("--G", learn.G, "Step-size scale")->capture_default_str();
  c_learn->add_option("--g", learn.g, "Step-size exponent")->capture_default_str();
  c_learn->add_option("--E", learn.E, "Regularization scale")->capture_default_str();
  c_learn->add_option("--e", learn.e, "Regularization exponent")->capture_default_str();
  c_learn->add_option("--S", learn.S, "Sampling-radius scale")->capture_default_str();
  c_learn->add_option("--s", learn.s, "Sampling-radius exponent")->capture_default_str();
  c_learn->add_option("-T", learn.T, "Number of updates")->capture_default_str()->check(CLI::PositiveNumber);
  c_learn->add_option("--seeds", learn.num_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
  c_learn->add_option("--seed-base", learn.seed_base, "First seed")->capture_default_str();
  c_learn->add_option("--record-every", learn.record_every, "Record cadence (0 = log-spaced)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_learn->add_option("-o,--out", learn.out, "Per-seed CSV; the aggregate goes next to it as <stem>_aggregate.csv")
      ->capture_default_str();
  c_learn->add_flag("--allow-invalid-schedules", learn.allow_invalid, "Run even if the schedules are invalid");
  c_learn->add_option("--workers", learn.workers, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  OracleOptions oracle;
  CLI::App* c_oracle = app.add_subcommand("oracle", "Solve for the v-GNE (or the regularized solution) exactly");
  oracle.game.attach(c_oracle);
  c_oracle->add_option("--eps", oracle.eps, "Solve the Tikhonov-regularized problem with this weight")
      ->check(CLI::NonNegativeNumber);
  c_oracle->add_option("--csv", oracle.csv, "Also write the solution as CSV");
  c_oracle->add_option("--format", oracle.format, "Output on stdout")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();

  DiagnoseOptions diag;
  CLI::App* c_diag = app.add_subcommand("diagnose", "Numerical checks of the regularization, operator and estimator bounds");
  diag.game.attach(c_diag);
  c_diag->add_option("--check", diag.checks, "Checks to run (repeatable; default all)")->check(CLI::IsMember(kChecks));
  c_diag->add_option("--seed", diag.seed, "Monte Carlo / sampling seed")->capture_default_str();
  c_diag->add_option("--samples", diag.samples, "Monte Carlo samples")->capture_default_str()->check(CLI::PositiveNumber);
  c_diag->add_option("--sigma", diag.sigma, "Sampling radius")->capture_default_str()->check(CLI::PositiveNumber);
  c_diag->add_option("--mu", diag.mu, "Probe mean, comma separated (default 0)");
  c_diag->add_option("--lambda", diag.lambda, "Probe dual vector, comma separated (default 0)");
  c_diag->add_option("--pairs", diag.pairs, "Random pairs for operator inequalities")->capture_default_str();
  c_diag->add_option("--E", diag.E, "Regularization scale for the drift check")->capture_default_str();
  c_diag->add_option("--e", diag.e, "Regularization exponent for the drift check")->capture_default_str();
  c_diag->add_option("--t-last", diag.t_last, "Last t of the drift check")->capture_default_str();
  c_diag->add_option("--csv", diag.csv, "Write the report here instead of stdout");

  RateFitOptions rf;
  CLI::App* c_rf = app.add_subcommand("rate-fit", "Fit log(mean err_primal_sq) against log(t)");
  c_rf->add_option("input", rf.input, "Aggregate CSV written by learn or reproduce-fig1")->required();
  c_rf->add_option("--t-min", rf.t_min, "Window start (default max(1e3, T/100))");
  c_rf->add_option("--t-max", rf.t_max, "Window end (default last t)");
  c_rf->add_option("--csv", rf.csv, "Also write the fit as CSV");

  Fig1Options fig;
  CLI::App* c_fig = app.add_subcommand("reproduce-fig1", "Three sampling-radius variants on paper-example plus a plot script");
  c_fig->add_option("-T", fig.T, "Number of updates")->capture_default_str()->check(CLI::PositiveNumber);
  c_fig->add_option("--seeds", fig.num_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
  c_fig->add_option("--seed-base", fig.seed_base, "First seed")->capture_default_str();
  c_fig->add_option("--record-every", fig.record_every, "Record cadence (0 = log-spaced)")->capture_default_str();
  c_fig->add_option("--output-dir", fig.output_dir, "Directory for CSVs and fig1.py")->capture_default_str();
  c_fig->add_option("--workers", fig.workers, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_learn->parsed()) return cmd_learn(learn, *c_learn);
    if (c_oracle->parsed()) return cmd_oracle(oracle);
    if (c_diag->parsed()) return cmd_diagnose(diag);
    if (c_rf->parsed()) return cmd_rate_fit(rf);
    if (c_fig->parsed()) return cmd_fig1(fig);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
