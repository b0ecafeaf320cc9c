#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/learner.hpp"
#include "vgne/schedules.hpp"

namespace vgne {

/// One multi-seed learning experiment.
struct ExperimentConfig {
  explicit ExperimentConfig(GameSpec g) : game(std::move(g)) {}

  GameSpec game;
  Schedules schedules;
  long T = 100'000;
  std::vector<std::uint64_t> seeds;
  long record_every = 0;  ///< see RunOptions::record_every
  /// Directory for `<label>.csv` (per-seed rows) and `<label>_aggregate.csv`.
  /// Empty keeps everything in memory.
  std::string output_dir;
  std::string label = "run";
  bool allow_invalid_schedules = false;
  int workers = 0;  ///< 0 = hardware concurrency

  /// Throws ConfigError unless seeds is nonempty and T >= 1.
  void validate() const;
};

/// Mean and standard error across seeds at one checkpoint.
struct AggregateRow {
  long t = 0;
  int num_seeds = 0;
  double mean_err_primal_sq = 0.0;
  double stderr_err_primal_sq = 0.0;
  double mean_err_dual_sq = 0.0;
  double stderr_err_dual_sq = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
  double sigma = 0.0;
};

struct MetricsTable {
  std::string label;
  std::vector<AggregateRow> rows;
  std::string raw_csv;        ///< paths of the written files, empty when not written
  std::string aggregate_csv;
};

struct ExperimentResult {
  MetricsTable table;
  std::vector<RunResult> runs;  ///< sorted by seed
};

/// Runs every seed (on a worker pool), then reduces in seed order so that the
/// result does not depend on scheduling or on the order of the seed list.
/// Throws ConfigError before any run when the output directory is not writable.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Per-checkpoint mean / standard error over runs. Runs must share checkpoints.
std::vector<AggregateRow> aggregate(std::vector<RunResult> runs);

void write_raw_csv(const std::vector<RunResult>& runs, const std::string& path);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path);
std::vector<AggregateRow> read_aggregate_csv(const std::string& path);

/// Least squares of log(err) on log(t).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Fits over the points with t in [t_min, t_max]. Throws when t_min >= t_max,
/// fewer than 5 points fall in the window or any error in it is <= 0.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& err, double t_min, double t_max);
RateFit fit_rate(const std::vector<AggregateRow>& rows, double t_min, double t_max);

/// [max(1e3, T/100), T].
std::pair<double, double> default_fit_window(long T);

/// Writes a matplotlib script that plots mean err_primal_sq against t on log-log
/// axes, one curve per table, reading the aggregate CSVs by path relative to the
/// script. Throws when there are no tables or a table was not written to disk.
void emit_plot_script(const std::vector<MetricsTable>& tables, const std::string& path);

/// The three-variant sampling-radius comparison on the builtin `paper-example` game:
/// g = 4/7, e = 2/7, G = E = S = 1 and s in {4/7, 2, 10}.
struct Fig1Options {
  long T = 100'000;
  int num_seeds = 20;
  std::uint64_t seed_base = 0;
  long record_every = 0;
  std::string output_dir = "fig1";
  int workers = 0;
};

struct Fig1Result {
  std::vector<MetricsTable> variants;
  std::string plot_script;
};

Fig1Result reproduce_fig1(const Fig1Options& opts);

/// The environment variable VGNE_OUTPUT_DIR, when set and nonempty, replaces
/// the configured output directory.
std::string resolve_output_dir(const std::string& configured);

/// Seeds base, base + 1, ..., base + count - 1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

}  // namespace vgne
