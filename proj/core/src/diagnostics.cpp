#include "vgne/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vgne/augmented.hpp"
#include "vgne/error.hpp"
#include "vgne/learner.hpp"
#include "vgne/oracles.hpp"

namespace vgne {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string vec_str(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index k = 0; k < v.size(); ++k) os << (k ? " " : "") << v(k);
  os << ']';
  return os.str();
}

std::string probe_str(const SmoothingProbe& p) {
  return "mu=" + vec_str(p.mu.flat()) + " lambda=" + vec_str(p.lambda) + " sigma=" + fmt(p.sigma) +
         " samples=" + std::to_string(p.num_samples) + " seed=" + std::to_string(p.seed);
}

// Running mean / variance per coordinate.
class Welford {
 public:
  explicit Welford(Eigen::Index dim) : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}

  void add(const Vector& x) {
    ++count_;
    const Vector delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(x - mean_);
  }

  long count() const { return count_; }
  const Vector& mean() const { return mean_; }
  Vector standard_error() const {
    if (count_ < 2) return Vector::Zero(mean_.size());
    return (m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_)).cwiseSqrt();
  }

 private:
  long count_ = 0;
  Vector mean_;
  Vector m2_;
};

LearnerState probe_state(const GameSpec& game, const SmoothingProbe& probe) {
  probe.validate(game);
  return LearnerState{probe.mu, probe.lambda, 1, std::mt19937_64(probe.seed), {}};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

}  // namespace

void SmoothingProbe::validate(const GameSpec& game) const {
  if (!(sigma > 0.0)) throw Error("smoothing probe requires sigma > 0");
  if (num_samples < 1) throw Error("smoothing probe requires at least one sample");
  if (mu.flat().size() != game.dim()) throw DimensionError("probe mean", game.dim(), mu.flat().size());
  if (lambda.size() != game.num_constraints()) throw DimensionError("probe dual", game.num_constraints(), lambda.size());
}

MonteCarloEstimate smoothed_cost(const GameSpec& game, const SmoothingProbe& probe, int player) {
  LearnerState state = probe_state(game, probe);
  const PayoffOracle oracle(game);
  Welford acc(1);
  Vector u(1);
  for (long k = 0; k < probe.num_samples; ++k) {
    const JointAction a = sample_action(state, probe.sigma);
    u(0) = oracle.augmented_costs(a.flat(), probe.lambda)(player);
    acc.add(u);
  }
  return {acc.mean()(0), acc.standard_error()(0), acc.count()};
}

double EstimatorMean::max_z_score() const {
  double z = 0.0;
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    const double diff = std::abs(mean(k) - target(k));
    z = std::max(z, standard_error(k) > 0 ? diff / standard_error(k) : (diff > 0 ? INFINITY : 0.0));
  }
  return z;
}

EstimatorMean estimator_mean(const GameSpec& game, const SmoothingProbe& probe, int player) {
  LearnerState state = probe_state(game, probe);
  const PayoffOracle oracle(game);
  const double u_mu = oracle.augmented_costs(probe.mu.flat(), probe.lambda)(player);
  Welford acc(game.layout().dim(player));
  for (long k = 0; k < probe.num_samples; ++k) {
    const JointAction a = sample_action(state, probe.sigma);
    const double u_a = oracle.augmented_costs(a.flat(), probe.lambda)(player);
    acc.add(two_point_estimate(u_a, u_mu, a.block(player), probe.mu.block(player), probe.sigma));
  }
  const Vector w = extended_pseudo_gradient(game, AugmentedPoint{probe.mu, probe.lambda});
  EstimatorMean out;
  out.mean = acc.mean();
  out.standard_error = acc.standard_error();
  out.target = w.segment(game.layout().offset(player), game.layout().dim(player));
  out.samples = acc.count();
  return out;
}

MonteCarloEstimate estimator_second_moment(const GameSpec& game, const SmoothingProbe& probe, int player) {
  LearnerState state = probe_state(game, probe);
  const PayoffOracle oracle(game);
  const double u_mu = oracle.augmented_costs(probe.mu.flat(), probe.lambda)(player);
  Welford acc(1);
  Vector x(1);
  for (long k = 0; k < probe.num_samples; ++k) {
    const JointAction a = sample_action(state, probe.sigma);
    const double u_a = oracle.augmented_costs(a.flat(), probe.lambda)(player);
    x(0) = two_point_estimate(u_a, u_mu, a.block(player), probe.mu.block(player), probe.sigma).squaredNorm();
    acc.add(x);
  }
  return {acc.mean()(0), acc.standard_error()(0), acc.count()};
}

QTermStatistics q_term_statistics(const GameSpec& game, const SmoothingProbe& probe, int player) {
  const EstimatorMean est = estimator_mean(game, probe, player);
  QTermStatistics q;
  q.bias = est.mean - est.target;
  q.raw_norm_sq = q.bias.squaredNorm();
  q.noise_floor = est.standard_error.squaredNorm();
  q.norm_sq = q.raw_norm_sq - q.noise_floor;
  const double norm = q.bias.norm();
  const double half_width = 4.0 * std::sqrt(q.noise_floor);
  q.ci_low = std::max(0.0, norm - half_width);
  q.ci_high = norm + half_width;
  return q;
}

STermStatistics s_term_statistics(const GameSpec& game, const SmoothingProbe& probe) {
  LearnerState state = probe_state(game, probe);
  const Matrix& K = game.constraints().K();
  Welford acc(1);
  Vector x(1);
  for (long k = 0; k < probe.num_samples; ++k) {
    const JointAction a = sample_action(state, probe.sigma);
    x(0) = (K * (probe.mu.flat() - a.flat())).squaredNorm();
    acc.add(x);
  }
  return {acc.mean()(0), acc.standard_error()(0), probe.sigma * probe.sigma * K.squaredNorm()};
}

// ---------------------------------------------------------------------------
// Reports

bool LemmaReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.pass; });
}

void LemmaReport::append(const LemmaReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

LemmaReport regularization_path_report(const GameSpec& game, const std::vector<double>& eps_grid) {
  if (!game.quadratic()) throw Error("regularization path report requires a quadratic game");
  for (double eps : eps_grid)
    if (!(eps > 0.0)) throw Error("regularization grid values must be positive");

  const OracleSolution star = solve_vgne(game);
  const double nu = game.quadratic()->strong_monotonicity();
  const double L = game.quadratic()->lipschitz();
  const double normK = game.constraints().norm_K();
  const double lam_norm = star.dual.norm();

  LemmaReport report{"regularization-path", {}};
  std::vector<RegularizedSolution> path;
  for (double eps : eps_grid) path.push_back(solve_regularized_vi(game, eps));

  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    const double eps = eps_grid[k];
    const double dist = (star.primal.flat() - path[k].primal.flat()).norm();
    // Without binding constraints the regularized and exact primal parts coincide.
    const double bound = normK > 0 ? eps * lam_norm * L / (normK * nu) : 0.0;
    report.checks.push_back({"regularization-error", game.name() + " eps=" + fmt(eps), dist, bound, dist <= bound + 1e-12,
                             "game=" + game.name() + " eps=" + fmt(eps)});
  }
  for (std::size_t k = 1; k < eps_grid.size(); ++k) {
    const double prev = eps_grid[k - 1];
    const double cur = eps_grid[k];
    const double deps = cur - prev;
    const double lam_prev_sq = path[k - 1].dual.squaredNorm();
    double primal_ratio = 0.0;
    double dual_ratio = 0.0;
    if (deps != 0.0) {
      primal_ratio = (path[k].primal.flat() - path[k - 1].primal.flat()).squaredNorm() * cur / (deps * deps);
      dual_ratio = (path[k].dual - path[k - 1].dual).squaredNorm() * cur * cur / (deps * deps);
    }
    const std::string name = game.name() + " eps=" + fmt(prev) + "->" + fmt(cur);
    const double primal_bound = lam_prev_sq / nu;
    report.checks.push_back({"path-drift-primal", name, primal_ratio, primal_bound,
                             primal_ratio <= primal_bound * (1 + 1e-9) + 1e-12, "game=" + game.name()});
    report.checks.push_back({"path-drift-dual", name, dual_ratio, lam_prev_sq,
                             dual_ratio <= lam_prev_sq * (1 + 1e-9) + 1e-12, "game=" + game.name()});
  }
  return report;
}

DriftSeries regularization_drift(const GameSpec& game, double E, double e, long t_first, long t_last) {
  if (t_first < 2 || t_last < t_first) throw Error("drift range must satisfy 2 <= t_first <= t_last");
  DriftSeries series;
  auto eps_at = [&](long t) { return E / std::pow(static_cast<double>(t), e); };
  RegularizedSolution prev = solve_regularized_vi(game, eps_at(t_first - 1));
  for (long t = t_first; t <= t_last; ++t) {
    const double eps_prev = eps_at(t - 1);
    const double eps = eps_at(t);
    RegularizedSolution cur = solve_regularized_vi(game, eps);
    const double deps = eps - eps_prev;
    double pr = 0.0;
    double dr = 0.0;
    if (deps != 0.0) {
      pr = (cur.primal.flat() - prev.primal.flat()).squaredNorm() * eps / (deps * deps);
      dr = (cur.dual - prev.dual).squaredNorm() * eps * eps / (deps * deps);
    }
    series.t.push_back(t);
    series.epsilon.push_back(eps);
    series.primal_ratio.push_back(pr);
    series.dual_ratio.push_back(dr);
    prev = std::move(cur);
  }
  return series;
}

LemmaReport drift_boundedness_report(const GameSpec& game, double E, double e, long t_first, long t_last,
                                     double factor) {
  const DriftSeries s = regularization_drift(game, E, e, t_first, t_last);
  LemmaReport report{"regularization-drift", {}};
  const std::string inputs = "game=" + game.name() + " E=" + fmt(E) + " e=" + fmt(e) + " t=" +
                             std::to_string(t_first) + ".." + std::to_string(t_last);
  for (const auto& [label, values] : {std::pair{"primal", &s.primal_ratio}, std::pair{"dual", &s.dual_ratio}}) {
    const double mx = *std::max_element(values->begin(), values->end());
    const double med = median(*values);
    const bool pass = mx == 0.0 || mx <= factor * med;
    report.checks.push_back({"drift-" + std::string(label), game.name() + " max/median", med > 0 ? mx / med : 0.0,
                             factor, pass, inputs});
  }
  return report;
}

LemmaReport operator_inequality_report(const GameSpec& game, int num_pairs, double eps, std::uint64_t seed,
                                       double tol) {
  if (num_pairs < 1) throw Error("operator inequality check needs at least one pair");
  const double nu = monotonicity_constant(game);
  const int D = game.dim();
  const int n = game.num_constraints();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> unif_pos(0.0, 1.0);

  double worst_plain = INFINITY;
  double worst_reg = INFINITY;
  std::string worst_plain_inputs, worst_reg_inputs;
  for (int p = 0; p < num_pairs; ++p) {
    Vector a1(D), a2(D), l1(n), l2(n);
    for (int k = 0; k < D; ++k) a1(k) = unif(rng);
    for (int k = 0; k < D; ++k) a2(k) = unif(rng);
    for (int k = 0; k < n; ++k) l1(k) = unif_pos(rng);
    for (int k = 0; k < n; ++k) l2(k) = unif_pos(rng);
    const AugmentedPoint z1{JointAction(game.layout(), a1), l1};
    const AugmentedPoint z2{JointAction(game.layout(), a2), l2};
    const Vector dz = z1.concatenated() - z2.concatenated();
    const double da2 = (a1 - a2).squaredNorm();
    const double dl2 = (l1 - l2).squaredNorm();
    const double plain =
        (extended_pseudo_gradient(game, z1) - extended_pseudo_gradient(game, z2)).dot(dz) - nu * da2;
    const double reg = (regularized_pseudo_gradient(game, z1, {eps}) - regularized_pseudo_gradient(game, z2, {eps}))
                           .dot(dz) - nu * da2 - eps * dl2;
    if (plain < worst_plain) {
      worst_plain = plain;
      worst_plain_inputs = "z1=" + vec_str(z1.concatenated()) + " z2=" + vec_str(z2.concatenated());
    }
    if (reg < worst_reg) {
      worst_reg = reg;
      worst_reg_inputs = "z1=" + vec_str(z1.concatenated()) + " z2=" + vec_str(z2.concatenated()) + " eps=" + fmt(eps);
    }
  }
  LemmaReport report{"operator-inequalities", {}};
  report.checks.push_back({"primal-monotonicity", game.name() + " min slack", worst_plain, -tol, worst_plain >= -tol,
                           worst_plain_inputs});
  report.checks.push_back({"regularized-monotonicity", game.name() + " min slack", worst_reg, -tol, worst_reg >= -tol,
                           worst_reg_inputs});
  return report;
}

LemmaReport estimator_unbiasedness_report(const GameSpec& game, const SmoothingProbe& probe, double z_max) {
  LemmaReport report{"estimator-mean", {}};
  for (int i = 0; i < game.num_players(); ++i) {
    const EstimatorMean est = estimator_mean(game, probe, i);
    const double z = est.max_z_score();
    report.checks.push_back({"estimator-mean", game.name() + " player " + std::to_string(i) + " max z-score", z, z_max,
                             z <= z_max, probe_str(probe)});
  }
  return report;
}

LemmaReport second_moment_growth_report(const GameSpec& game, const SmoothingProbe& probe, double slack) {
  LemmaReport report{"second-moment-growth", {}};
  const double scales[] = {1.0, 2.0, 4.0, 8.0};
  for (int i = 0; i < game.num_players(); ++i) {
    std::vector<double> moments;
    for (double c : scales) {
      SmoothingProbe scaled = probe;
      scaled.mu = JointAction(game.layout(), c * probe.mu.flat());
      scaled.lambda = c * probe.lambda;
      moments.push_back(estimator_second_moment(game, scaled, i).mean);
    }
    // Growth exponent over the last doubling, where the quadratic term dominates.
    const double exponent = std::log2(moments[3] / moments[2]);
    report.checks.push_back({"second-moment-growth", game.name() + " player " + std::to_string(i) + " growth exponent c=4->8",
                             exponent, 2.0 + slack, exponent <= 2.0 + slack, probe_str(probe)});
  }
  return report;
}

LemmaReport s_term_report(const GameSpec& game, const SmoothingProbe& probe, double rel_tol) {
  const STermStatistics s = s_term_statistics(game, probe);
  const double rel = s.exact > 0 ? std::abs(s.mean_sq - s.exact) / s.exact : std::abs(s.mean_sq);
  return LemmaReport{"sampling-perturbation", {{"sampling-perturbation", game.name() + " relative error of E||S||^2", rel, rel_tol,
                                   rel <= rel_tol, probe_str(probe)}}};
}

QScalingFit q_term_scaling(const GameSpec& game, const SmoothingProbe& probe, int player,
                           const std::vector<double>& sigma_grid) {
  if (sigma_grid.size() < 2) throw Error("Q-term scaling needs at least two sigma values");
  if (game.quadratic()) throw Error("smoothing bias of a quadratic game is identically zero; no order to fit");
  QScalingFit fit;
  std::vector<double> log_s, log_q;
  for (double sigma : sigma_grid) {
    SmoothingProbe p = probe;
    p.sigma = sigma;
    const QTermStatistics q = q_term_statistics(game, p, player);
    if (!(q.norm_sq > 0.0))
      throw Error("smoothing bias indistinguishable from Monte Carlo noise at sigma=" + fmt(sigma) +
                  "; increase num_samples");
    fit.sigma.push_back(sigma);
    fit.q_norm_sq.push_back(q.norm_sq);
    log_s.push_back(std::log(sigma));
    log_q.push_back(std::log(q.norm_sq));
  }
  fit.slope = ols_slope(log_s, log_q);
  return fit;
}

LemmaReport q_scaling_report(const GameSpec& game, const SmoothingProbe& probe, const std::vector<double>& sigma_grid,
                             double expected, double tol) {
  LemmaReport report{"smoothing-bias-order", {}};
  for (int i = 0; i < game.num_players(); ++i) {
    const QScalingFit fit = q_term_scaling(game, probe, i, sigma_grid);
    const double dev = std::abs(fit.slope - expected);
    report.checks.push_back({"smoothing-bias-order",
                             game.name() + " player " + std::to_string(i) + " |slope - " + fmt(expected) +
                                 "| of log E||Q||^2 (slope " + fmt(fit.slope) + ")",
                             dev, tol, dev <= tol,
                             probe_str(probe) + " expected_slope=" + fmt(expected)});
  }
  return report;
}

}  // namespace vgne
