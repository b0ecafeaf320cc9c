#include "vgne/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <fstream>
#include <sstream>
#include <thread>

#include "vgne/builtins.hpp"
#include "vgne/error.hpp"
#include "vgne/oracles.hpp"

namespace vgne {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + dir + "' cannot be created");
  const fs::path probe = fs::path(dir) / ".vgne-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (T < 1) throw ConfigError("run length T must be at least 1");
  if (record_every < 0) throw ConfigError("record cadence must be nonnegative");
  if (label.empty()) throw ConfigError("experiment label must be nonempty");
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  if (count < 1) throw ConfigError("seed count must be at least 1");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) seeds[static_cast<std::size_t>(k)] = base + static_cast<std::uint64_t>(k);
  return seeds;
}

std::string resolve_output_dir(const std::string& configured) {
  const char* env = std::getenv("VGNE_OUTPUT_DIR");
  if (env != nullptr && *env != '\0') return env;
  return configured;
}

std::vector<AggregateRow> aggregate(std::vector<RunResult> runs) {
  if (runs.empty()) throw Error("nothing to aggregate");
  std::sort(runs.begin(), runs.end(), [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
  const std::size_t rows = runs.front().records.size();
  for (const auto& r : runs)
    if (r.records.size() != rows) throw DimensionError("checkpoints per run", static_cast<long>(rows),
                                                       static_cast<long>(r.records.size()));

  const double n = static_cast<double>(runs.size());
  std::vector<AggregateRow> out(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const TrajectoryRecord& first = runs.front().records[k];
    AggregateRow& row = out[k];
    row.t = first.t;
    row.num_seeds = static_cast<int>(runs.size());
    row.gamma = first.gamma;
    row.eps = first.eps;
    row.sigma = first.sigma;
    double sp = 0.0, sd = 0.0;
    for (const auto& r : runs) {
      if (r.records[k].t != row.t) throw Error("runs disagree on checkpoint positions");
      sp += r.records[k].err_primal_sq;
      sd += r.records[k].err_dual_sq;
    }
    row.mean_err_primal_sq = sp / n;
    row.mean_err_dual_sq = sd / n;
    if (runs.size() > 1) {
      double vp = 0.0, vd = 0.0;
      for (const auto& r : runs) {
        vp += std::pow(r.records[k].err_primal_sq - row.mean_err_primal_sq, 2);
        vd += std::pow(r.records[k].err_dual_sq - row.mean_err_dual_sq, 2);
      }
      row.stderr_err_primal_sq = std::sqrt(vp / (n - 1.0) / n);
      row.stderr_err_dual_sq = std::sqrt(vd / (n - 1.0) / n);
    }
  }
  return out;
}

void write_raw_csv(const std::vector<RunResult>& runs, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "t,seed,err_primal_sq,err_dual_sq,gamma,eps,sigma\n";
  for (const auto& r : runs)
    for (const auto& rec : r.records)
      out << rec.t << ',' << r.seed << ',' << fmt(rec.err_primal_sq) << ',' << fmt(rec.err_dual_sq) << ','
          << fmt(rec.gamma) << ',' << fmt(rec.eps) << ',' << fmt(rec.sigma) << '\n';
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "t,num_seeds,mean_err_primal_sq,stderr_err_primal_sq,mean_err_dual_sq,stderr_err_dual_sq,gamma,eps,sigma\n";
  for (const auto& r : rows)
    out << r.t << ',' << r.num_seeds << ',' << fmt(r.mean_err_primal_sq) << ',' << fmt(r.stderr_err_primal_sq)
        << ',' << fmt(r.mean_err_dual_sq) << ',' << fmt(r.stderr_err_dual_sq) << ',' << fmt(r.gamma) << ','
        << fmt(r.eps) << ',' << fmt(r.sigma) << '\n';
}

std::vector<AggregateRow> read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,num_seeds,mean_err_primal_sq", 0) != 0)
    throw ConfigError("'" + path + "' is not an aggregate CSV");
  std::vector<AggregateRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 9) throw ConfigError("'" + path + "' line " + std::to_string(lineno) + ": expected 9 columns");
    try {
      AggregateRow r;
      r.t = std::stol(cells[0]);
      r.num_seeds = std::stoi(cells[1]);
      r.mean_err_primal_sq = std::stod(cells[2]);
      r.stderr_err_primal_sq = std::stod(cells[3]);
      r.mean_err_dual_sq = std::stod(cells[4]);
      r.stderr_err_dual_sq = std::stod(cells[5]);
      r.gamma = std::stod(cells[6]);
      r.eps = std::stod(cells[7]);
      r.sigma = std::stod(cells[8]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ConfigError("'" + path + "' line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.output_dir.empty()) ensure_writable(cfg.output_dir);
  const ScheduleReport report = validate_schedules(cfg.schedules);
  if (!report.valid() && !cfg.allow_invalid_schedules) {
    std::string msg = "schedules violate the convergence conditions:";
    for (const auto& f : report.failures()) msg += " " + f + ";";
    throw ScheduleError(msg);
  }

  RunOptions opts;
  opts.record_every = cfg.record_every;
  opts.allow_invalid_schedules = cfg.allow_invalid_schedules;
  opts.reference = reference_equilibrium(cfg.game);

  const std::size_t n = cfg.seeds.size();
  std::vector<std::optional<RunResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        slots[k] = run(cfg.game, cfg.schedules, cfg.T, cfg.seeds[k], opts);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned hw = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::max(1u, std::thread::hardware_concurrency());
  const unsigned num_threads = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  if (num_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < num_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  for (auto& s : slots) result.runs.push_back(std::move(*s));
  std::sort(result.runs.begin(), result.runs.end(),
            [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
  result.table.label = cfg.label;
  result.table.rows = aggregate(result.runs);

  if (!cfg.output_dir.empty()) {
    const fs::path dir(cfg.output_dir);
    result.table.raw_csv = (dir / (cfg.label + ".csv")).string();
    result.table.aggregate_csv = (dir / (cfg.label + "_aggregate.csv")).string();
    write_raw_csv(result.runs, result.table.raw_csv);
    write_aggregate_csv(result.table.rows, result.table.aggregate_csv);
  }
  return result;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& err, double t_min, double t_max) {
  if (t.size() != err.size()) throw DimensionError("error series", static_cast<long>(t.size()),
                                                   static_cast<long>(err.size()));
  if (!(t_min < t_max)) throw Error("rate fit window needs t_min < t_max");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_min || t[k] > t_max) continue;
    if (!(err[k] > 0.0))
      throw Error("rate fit needs positive errors; got " + fmt(err[k]) + " at t = " + fmt(t[k]));
    x.push_back(std::log(t[k]));
    y.push_back(std::log(err[k]));
  }
  if (x.size() < 5)
    throw Error("rate fit needs at least 5 checkpoints in [" + fmt(t_min) + ", " + fmt(t_max) + "], got " +
                std::to_string(x.size()));

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw Error("rate fit needs at least two distinct t values");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.points = static_cast<int>(x.size());
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) ss_res += std::pow(y[k] - fit.intercept - fit.slope * x[k], 2);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RateFit fit_rate(const std::vector<AggregateRow>& rows, double t_min, double t_max) {
  std::vector<double> t, err;
  for (const auto& r : rows) {
    t.push_back(static_cast<double>(r.t));
    err.push_back(r.mean_err_primal_sq);
  }
  return fit_rate(t, err, t_min, t_max);
}

std::pair<double, double> default_fit_window(long T) {
  return {std::max(1e3, static_cast<double>(T) / 100.0), static_cast<double>(T)};
}

void emit_plot_script(const std::vector<MetricsTable>& tables, const std::string& path) {
  if (tables.empty()) throw Error("plot script needs at least one metrics table");
  for (const auto& tb : tables) {
    if (tb.rows.empty()) throw Error("metrics table '" + tb.label + "' is empty");
    if (tb.aggregate_csv.empty()) throw Error("metrics table '" + tb.label + "' was not written to disk");
  }
  const fs::path script(path);
  const fs::path base = script.has_parent_path() ? script.parent_path() : fs::path(".");

  std::ofstream out = open_for_write(path);
  out << "#!/usr/bin/env python3\n"
         "# Generated by vgne: mean squared distance to the equilibrium against t.\n"
         "import csv\n"
         "import os\n"
         "import matplotlib\n"
         "matplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\n\n"
         "HERE = os.path.dirname(os.path.abspath(__file__))\n"
         "CURVES = [\n";
  for (const auto& tb : tables) {
    const std::string rel = fs::relative(fs::absolute(tb.aggregate_csv), fs::absolute(base)).generic_string();
    out << "    (\"" << tb.label << "\", \"" << rel << "\"),\n";
  }
  out << "]\n\n"
         "fig, ax = plt.subplots(figsize=(6, 4))\n"
         "for label, rel in CURVES:\n"
         "    t, err = [], []\n"
         "    with open(os.path.join(HERE, rel)) as f:\n"
         "        for row in csv.DictReader(f):\n"
         "            t.append(float(row[\"t\"]))\n"
         "            err.append(float(row[\"mean_err_primal_sq\"]))\n"
         "    ax.loglog(t, err, label=label)\n"
         "ax.set_xlabel(\"t\")\n"
         "ax.set_ylabel(\"mean ||mu(t) - a*||^2\")\n"
         "ax.legend()\n"
         "ax.grid(True, which=\"both\", alpha=0.3)\n"
         "fig.tight_layout()\n"
         "fig.savefig(os.path.join(HERE, \""
      << script.stem().string() << ".png\"), dpi=150)\n";
}

Fig1Result reproduce_fig1(const Fig1Options& opts) {
  struct Variant {
    const char* label;
    double s;
  };
  const Variant variants[] = {{"s_4_7", 4.0 / 7.0}, {"s_2", 2.0}, {"s_10", 10.0}};

  const std::string dir = opts.output_dir;
  if (dir.empty()) throw ConfigError("reproduce-fig1 needs an output directory");
  ensure_writable(dir);

  Fig1Result result;
  for (const auto& v : variants) {
    ExperimentConfig cfg(paper_example());
    cfg.schedules = Schedules::rate_optimal(v.s);
    cfg.T = opts.T;
    cfg.seeds = seed_range(opts.seed_base, opts.num_seeds);
    cfg.record_every = opts.record_every;
    cfg.output_dir = dir;
    cfg.label = v.label;
    cfg.workers = opts.workers;
    result.variants.push_back(run_experiment(cfg).table);
  }
  result.plot_script = (fs::path(dir) / "fig1.py").string();
  emit_plot_script(result.variants, result.plot_script);
  return result;
}

}  // namespace vgne
