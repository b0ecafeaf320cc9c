#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgne/game.hpp"

namespace vgne {

/// Point and sampling parameters for Monte Carlo checks of the estimator.
struct SmoothingProbe {
  JointAction mu;
  Vector lambda;
  double sigma = 0.1;
  long num_samples = 100'000;
  std::uint64_t seed = 1;

  /// Throws unless sigma > 0 and num_samples >= 1.
  void validate(const GameSpec& game) const;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  long samples = 0;
};

/// Gaussian-smoothed cost U~^i_sigma(mu, lambda) = E[U^i(mu + sigma xi, lambda)].
MonteCarloEstimate smoothed_cost(const GameSpec& game, const SmoothingProbe& probe, int player);

/// Sample mean of the two-point estimate m^i against the exact W^i(mu, lambda).
struct EstimatorMean {
  Vector mean;            ///< sample mean of m^i
  Vector standard_error;  ///< per coordinate
  Vector target;          ///< W^i(mu, lambda)
  long samples = 0;

  /// max_k |mean_k - target_k| / se_k.
  double max_z_score() const;
};

EstimatorMean estimator_mean(const GameSpec& game, const SmoothingProbe& probe, int player);

/// E||m^i||^2 by Monte Carlo.
MonteCarloEstimate estimator_second_moment(const GameSpec& game, const SmoothingProbe& probe, int player);

/// Smoothing bias Q^i = W~^i_sigma(mu) - W^i(mu), estimated as mean(m^i) - W^i.
struct QTermStatistics {
  Vector bias;
  double norm_sq = 0.0;      ///< ||bias||^2 minus the Monte Carlo noise floor
  double raw_norm_sq = 0.0;  ///< ||bias||^2
  double noise_floor = 0.0;  ///< sum_k se_k^2
  double ci_low = 0.0;       ///< ||bias|| -/+ 4 * sqrt(noise_floor), clamped at 0
  double ci_high = 0.0;
};

QTermStatistics q_term_statistics(const GameSpec& game, const SmoothingProbe& probe, int player);

/// Dual-side perturbation S = K(mu - a): E||S||^2 against sigma^2 ||K||_F^2.
struct STermStatistics {
  double mean_sq = 0.0;
  double standard_error = 0.0;
  double exact = 0.0;
};

STermStatistics s_term_statistics(const GameSpec& game, const SmoothingProbe& probe);

/// One row of a diagnostic report.
struct LemmaCheck {
  std::string lemma;
  std::string case_name;
  double statistic = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string inputs;  ///< enough to reproduce a failure
};

struct LemmaReport {
  std::string lemma;
  std::vector<LemmaCheck> checks;

  bool all_pass() const;
  void append(const LemmaReport& other);
};

/// Along the grid checks, for every eps,
///   ||a* - a*_eps|| <= eps ||lambda*|| L / (||K|| nu)         (regularization error)
/// and for consecutive grid points (prev, cur)
///   ||a*_cur - a*_prev||^2 eps_cur / (eps_cur - eps_prev)^2 <= ||lambda*_prev||^2 / nu
///   ||l*_cur - l*_prev||^2 eps_cur^2 / (eps_cur - eps_prev)^2 <= ||lambda*_prev||^2
/// (drift between consecutive regularized solutions). Equal grid points give zero drift.
/// Requires a quadratic game; nu and L are eigenvalue exact.
LemmaReport regularization_path_report(const GameSpec& game, const std::vector<double>& eps_grid);

/// Normalized drift ratios of consecutive regularized solutions along eps_t.
struct DriftSeries {
  std::vector<long> t;
  std::vector<double> epsilon;
  std::vector<double> primal_ratio;  ///< ||a*_t - a*_{t-1}||^2 eps_t / (eps_t - eps_{t-1})^2
  std::vector<double> dual_ratio;    ///< ||l*_t - l*_{t-1}||^2 eps_t^2 / (eps_t - eps_{t-1})^2
};

/// Drift ratios for eps_t = E / t^e, t = t_first..t_last (t_first >= 2).
DriftSeries regularization_drift(const GameSpec& game, double E, double e, long t_first, long t_last);

/// Bounded-drift check: max ratio <= factor * median ratio for both series
/// (a series that is identically zero passes).
LemmaReport drift_boundedness_report(const GameSpec& game, double E, double e, long t_first, long t_last,
                                     double factor = 10.0);

/// <W(z1)-W(z2), z1-z2> >= nu ||a1-a2||^2 and
/// <W_eps(z1)-W_eps(z2), z1-z2> >= nu ||a1-a2||^2 + eps ||l1-l2||^2 on random pairs.
/// statistic = min slack over pairs, bound = -tol.
LemmaReport operator_inequality_report(const GameSpec& game, int num_pairs, double eps, std::uint64_t seed,
                                       double tol = 1e-12);

/// Sample mean of m^i within z_max standard errors of W^i for every player.
LemmaReport estimator_unbiasedness_report(const GameSpec& game, const SmoothingProbe& probe,
                                          double z_max = 4.0);

/// E||m^i||^2 at scaled points c * (mu, lambda) for c in {1, 2, 4, 8}: the growth
/// exponent log2(E(2c) / E(c)) stays below 2 + slack.
LemmaReport second_moment_growth_report(const GameSpec& game, const SmoothingProbe& probe, double slack = 0.3);

/// E||S||^2 within rel_tol of sigma^2 ||K||_F^2.
LemmaReport s_term_report(const GameSpec& game, const SmoothingProbe& probe, double rel_tol = 0.05);

/// Least-squares slope of log E||Q^i||^2 against log sigma over the sigma grid.
struct QScalingFit {
  std::vector<double> sigma;
  std::vector<double> q_norm_sq;
  double slope = 0.0;
};

QScalingFit q_term_scaling(const GameSpec& game, const SmoothingProbe& probe, int player,
                           const std::vector<double>& sigma_grid);

/// |slope - expected| <= tol (expected = 2 for the smoothing-bias order).
LemmaReport q_scaling_report(const GameSpec& game, const SmoothingProbe& probe, const std::vector<double>& sigma_grid,
                             double expected = 2.0, double tol = 0.3);

}  // namespace vgne
