#include <doctest.h>

#include <cmath>

#include "vgne/augmented.hpp"
#include "vgne/builtins.hpp"
#include "vgne/diagnostics.hpp"
#include "vgne/error.hpp"
#include "vgne/oracles.hpp"

using namespace vgne;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

SmoothingProbe probe_at(const GameSpec& g, const Vector& mu, const Vector& lambda, double sigma, long samples,
                        std::uint64_t seed = 1) {
  return SmoothingProbe{JointAction(g.layout(), mu), lambda, sigma, samples, seed};
}

const std::vector<double> kGrid = {1e-1, 1e-2, 1e-3, 1e-4};

}  // namespace

TEST_CASE("probe validation") {
  const GameSpec g = paper_example();
  CHECK_THROWS_AS(probe_at(g, vec({0, 0}), vec({0}), 0.0, 10).validate(g), Error);
  CHECK_THROWS_AS(probe_at(g, vec({0, 0}), vec({0}), 0.1, 0).validate(g), Error);
  CHECK_THROWS_AS(probe_at(g, vec({0, 0}), vec({0, 0}), 0.1, 10).validate(g), DimensionError);
  CHECK_THROWS_AS(q_term_statistics(g, probe_at(g, vec({0, 0}), vec({0}), 0.0, 10), 0), Error);
}

TEST_CASE("smoothed cost of a quadratic game matches the Gaussian integral") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const Vector mu = Vector::LinSpaced(g.dim(), -0.4, 0.6);
    const Vector lambda = Vector::Constant(g.num_constraints(), 0.5);
    const SmoothingProbe p = probe_at(g, mu, lambda, 0.3, 100'000, seed + 1);
    for (int i = 0; i < g.num_players(); ++i) {
      const MonteCarloEstimate est = smoothed_cost(g, p, i);
      const Matrix& A = g.quadratic()->A()[static_cast<std::size_t>(i)];
      // Hessian of U^i is sym(A_i); the dual term is linear.
      const double exact =
          augmented_cost(g, i, AugmentedPoint{p.mu, lambda}) + 0.5 * p.sigma * p.sigma * A.trace();
      CHECK(std::abs(est.mean - exact) <= 4 * est.standard_error);
    }
  }
}

TEST_CASE("smoothed cost in the point-mass limit") {
  const GameSpec g = paper_example();
  const SmoothingProbe p = probe_at(g, vec({0.7, -0.3}), vec({0.4}), 1e-6, 1000);
  for (int i = 0; i < 2; ++i) {
    const double exact = augmented_cost(g, i, AugmentedPoint{p.mu, p.lambda});
    CHECK(smoothed_cost(g, p, i).mean == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("smoothed cost of a linear cost is unbiased") {
  BlockLayout layout({1, 1});
  const GameSpec g(QuadraticGame(layout, {Matrix::Zero(2, 2), Matrix::Zero(2, 2)}, {vec({1, -2}), vec({0.5, 3})}),
                   ConstraintSet::none(2));
  for (double sigma : {0.1, 1.0, 10.0}) {
    const SmoothingProbe p = probe_at(g, vec({0.2, 0.3}), Vector(0), sigma, 20'000);
    for (int i = 0; i < 2; ++i) {
      const MonteCarloEstimate est = smoothed_cost(g, p, i);
      CHECK(std::abs(est.mean - evaluate_cost(g, i, p.mu.flat())) <= 4 * est.standard_error);
    }
  }
}

TEST_CASE("smoothed cost standard error shrinks like 1/sqrt(samples)") {
  const GameSpec g = paper_example();
  const MonteCarloEstimate a = smoothed_cost(g, probe_at(g, vec({0.5, 0.5}), vec({1}), 0.2, 50'000), 0);
  const MonteCarloEstimate b = smoothed_cost(g, probe_at(g, vec({0.5, 0.5}), vec({1}), 0.2, 100'000), 0);
  const double ratio = a.standard_error / b.standard_error;
  CHECK(ratio >= 1.2);
  CHECK(ratio <= 1.7);
}

TEST_CASE("smoothing bias of a quadratic game is statistically zero") {
  const GameSpec g = random_quadratic(2);
  const SmoothingProbe p = probe_at(g, Vector::LinSpaced(g.dim(), 0.5, -0.5),
                                    Vector::Constant(g.num_constraints(), 0.2), 0.1, 100'000);
  for (int i = 0; i < g.num_players(); ++i) {
    const QTermStatistics q = q_term_statistics(g, p, i);
    CHECK(q.ci_low == 0.0);
    CHECK(q.raw_norm_sq <= 16 * q.noise_floor);
  }
}

TEST_CASE("smoothing bias of the kinked family drops about 4x when sigma halves") {
  const GameSpec g = softplus_coupled_example();
  const SmoothingProbe p = probe_at(g, vec({0, 0}), vec({0}), 0.1, 100'000);
  SmoothingProbe half = p;
  half.sigma = 0.05;
  for (int i = 0; i < 2; ++i) {
    const double ratio = q_term_statistics(g, p, i).norm_sq / q_term_statistics(g, half, i).norm_sq;
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.3);
  }
}

TEST_CASE("smoothing-bias order fit") {
  const GameSpec g = softplus_coupled_example();
  const SmoothingProbe p = probe_at(g, vec({0, 0}), vec({0}), 0.1, 100'000);
  const LemmaReport r = q_scaling_report(g, p, {0.2, 0.1, 0.05, 0.025});
  CHECK(r.all_pass());
  for (int i = 0; i < 2; ++i) {
    const QScalingFit fit = q_term_scaling(g, p, i, {0.2, 0.1, 0.05, 0.025});
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.15));
  }
  CHECK_THROWS_AS(q_term_scaling(paper_example(), probe_at(paper_example(), vec({0, 0}), vec({0}), 0.1, 10'000), 0,
                                 {0.2, 0.1, 0.05, 0.025}),
                  Error);
}

TEST_CASE("sampling perturbation second moment is exact") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const SmoothingProbe p = probe_at(g, Vector::Zero(g.dim()), Vector::Zero(g.num_constraints()), 0.3, 100'000, seed);
    const STermStatistics s = s_term_statistics(g, p);
    double frob = 0.0;
    for (int j = 0; j < g.num_constraints(); ++j)
      for (int k = 0; k < g.dim(); ++k) frob += std::pow(g.constraints().K()(j, k), 2);
    CHECK(s.exact == doctest::Approx(0.09 * frob));
    CHECK(std::abs(s.mean_sq - s.exact) <= 0.05 * s.exact);
    CHECK(s_term_report(g, p).all_pass());
  }
}

TEST_CASE("estimator mean matches the operator for quadratic games") {
  const GameSpec g = paper_example();
  const SmoothingProbe p = probe_at(g, vec({0.3, -0.2}), vec({0.5}), 0.1, 100'000);
  const LemmaReport r = estimator_unbiasedness_report(g, p);
  CHECK(r.checks.size() == 2);
  CHECK(r.all_pass());
  const EstimatorMean m = estimator_mean(g, p, 0);
  CHECK(m.target(0) == doctest::Approx(3 * 0.3 - 0.2 - 0.5));
  CHECK(m.samples == 100'000);
}

TEST_CASE("second moment grows at most quadratically in the probe scale") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const SmoothingProbe p = probe_at(g, Vector::LinSpaced(g.dim(), 0.3, -0.6),
                                      Vector::Constant(g.num_constraints(), 0.4), 0.1, 20'000, seed);
    const LemmaReport r = second_moment_growth_report(g, p);
    CHECK(r.all_pass());
    for (const auto& c : r.checks) {
      CHECK(c.statistic > 0.5);
      CHECK(c.statistic <= 2.3);
    }
  }
}

TEST_CASE("operator inequalities on random games") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LemmaReport r = operator_inequality_report(random_quadratic(seed), 1000, 0.1, seed);
    CHECK(r.checks.size() == 2);
    CHECK(r.all_pass());
  }
}

TEST_CASE("regularization path on paper-example game") {
  const LemmaReport r = regularization_path_report(paper_example(), kGrid);
  CHECK(r.all_pass());
  int error_checks = 0;
  for (const auto& c : r.checks) {
    if (c.lemma != "regularization-error") continue;
    ++error_checks;
    // Closed form: ||a* - a*_eps|| = eps / (1 + eps).
    CHECK(c.statistic > 0.0);
    CHECK(c.statistic <= c.bound);
  }
  CHECK(error_checks == 4);
}

TEST_CASE("regularization path on ten random games") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const LemmaReport r = regularization_path_report(random_quadratic(seed), kGrid);
    CHECK(r.all_pass());
  }
}

TEST_CASE("regularization path with a repeated grid point reports zero drift") {
  const LemmaReport r = regularization_path_report(paper_example(), {1e-2, 1e-2});
  for (const auto& c : r.checks)
    if (c.lemma.rfind("path-drift", 0) == 0) {
      CHECK(c.statistic == 0.0);
      CHECK(c.pass);
    }
  CHECK_THROWS_AS(regularization_path_report(paper_example(), {0.1, 0.0}), Error);
  CHECK_THROWS_AS(regularization_path_report(softplus_coupled_example(), kGrid), Error);
}

// The bound eps ||lambda*|| L / (||K|| nu) uses the spectral norm of the whole
// constraint matrix. When some rows are inactive (or the active rows are badly
// conditioned) the constant that actually controls the multiplier error is the
// smallest singular value of the rows carrying multipliers, which can be much
// smaller than ||K||. Random game 12 is a concrete instance where the
// ||K|| version fails while the active-row version holds.
TEST_CASE("regularization error bound depends on the active rows of K") {
  const GameSpec g = random_quadratic(12);
  const LemmaReport r = regularization_path_report(g, kGrid);
  bool any_fail = false;
  for (const auto& c : r.checks)
    if (c.lemma == "regularization-error" && !c.pass) {
      any_fail = true;
      CHECK_FALSE(c.inputs.empty());
    }
  CHECK(any_fail);

  const OracleSolution star = solve_vgne(g);
  const double nu = g.quadratic()->strong_monotonicity();
  const double L = g.quadratic()->lipschitz();
  for (double eps : kGrid) {
    const RegularizedSolution reg = solve_regularized_vi(g, eps);
    std::vector<int> rows;
    for (int j = 0; j < g.num_constraints(); ++j)
      if (star.dual(j) > 0 || reg.dual(j) > 0) rows.push_back(j);
    Matrix KJ(static_cast<Eigen::Index>(rows.size()), g.dim());
    for (std::size_t r2 = 0; r2 < rows.size(); ++r2) KJ.row(static_cast<Eigen::Index>(r2)) = g.constraints().K().row(rows[r2]);
    const double smin = Eigen::JacobiSVD<Matrix>(KJ).singularValues().minCoeff();
    const double dist = (star.primal.flat() - reg.primal.flat()).norm();
    CHECK(dist <= eps * star.dual.norm() * L / (smin * nu) * (1 + 1e-9));
  }
}

TEST_CASE("regularization drift along the schedule") {
  const GameSpec g = paper_example();
  const DriftSeries s = regularization_drift(g, 1.0, 2.0 / 7.0, 2, 200);
  CHECK(s.t.size() == 199);
  CHECK(s.t.front() == 2);
  CHECK(s.epsilon.front() == doctest::Approx(std::pow(2.0, -2.0 / 7.0)));
  for (double v : s.primal_ratio) CHECK(v >= 0.0);
  const LemmaReport r = drift_boundedness_report(g, 1.0, 2.0 / 7.0, 2, 200);
  CHECK(r.checks.size() == 2);
  CHECK(r.all_pass());
  for (const auto& c : r.checks) CHECK(c.statistic <= 10.0);
  CHECK_THROWS_AS(regularization_drift(g, 1.0, 2.0 / 7.0, 1, 200), Error);
}

TEST_CASE("reports are deterministic") {
  const GameSpec g = random_quadratic(4);
  const SmoothingProbe p = probe_at(g, Vector::Zero(g.dim()), Vector::Zero(g.num_constraints()), 0.1, 5000, 3);
  const LemmaReport a = estimator_unbiasedness_report(g, p), b = estimator_unbiasedness_report(g, p);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t k = 0; k < a.checks.size(); ++k) CHECK(a.checks[k].statistic == b.checks[k].statistic);
  const LemmaReport c = operator_inequality_report(g, 100, 0.1, 7), d = operator_inequality_report(g, 100, 0.1, 7);
  CHECK(c.checks[0].statistic == d.checks[0].statistic);
}
