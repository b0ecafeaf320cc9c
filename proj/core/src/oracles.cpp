#include "vgne/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vgne/error.hpp"

namespace vgne {

namespace {

struct Factorized {
  Vector Pinv_q;   // P^{-1} q
  Matrix Pinv_Kt;  // P^{-1} K^T
};

const QuadraticGame& require_quadratic(const GameSpec& game) {
  const QuadraticGame* q = game.quadratic();
  if (!q) throw OracleError("exact oracle requires a quadratic game; use the extragradient solver instead");
  if (!(q->strong_monotonicity() > 0.0))
    throw OracleError("pseudo-gradient is not strongly monotone (nu = " + std::to_string(q->strong_monotonicity()) + ")");
  if (game.num_constraints() > kMaxEnumeratedConstraints)
    throw OracleError("too many constraints for active-set enumeration (" + std::to_string(game.num_constraints()) +
                      " > " + std::to_string(kMaxEnumeratedConstraints) + ")");
  return *q;
}

Factorized factorize(const QuadraticGame& q, const Matrix& K) {
  Eigen::PartialPivLU<Matrix> lu(q.P());
  return {lu.solve(q.q()), lu.solve(Matrix(K.transpose()))};
}

std::vector<int> mask_indices(unsigned long mask, int n) {
  std::vector<int> idx;
  for (int j = 0; j < n; ++j)
    if (mask & (1UL << j)) idx.push_back(j);
  return idx;
}

// For active rows S: lambda_S solves (K_S P^{-1} K_S^T + eps I) lambda_S = -(l_S + K_S P^{-1} q).
// With eps = 0 the least-norm solution is taken; its null space equals that of K_S^T,
// so it is the least-norm multiplier supported on S.
struct Candidate {
  Vector a;
  Vector lambda;
};

Candidate solve_on_support(const Factorized& f, const Matrix& K, const Vector& l, const std::vector<int>& S, double eps) {
  const int n = static_cast<int>(l.size());
  Candidate c;
  c.lambda = Vector::Zero(n);
  if (S.empty()) {
    c.a = -f.Pinv_q;
    return c;
  }
  const int m = static_cast<int>(S.size());
  Matrix H(m, m);
  Vector rhs(m);
  for (int r = 0; r < m; ++r) {
    rhs(r) = -(l(S[r]) + K.row(S[r]).dot(f.Pinv_q));
    for (int s = 0; s < m; ++s) H(r, s) = K.row(S[r]).dot(f.Pinv_Kt.col(S[s]));
  }
  Vector lam;
  if (eps > 0.0) {
    H.diagonal().array() += eps;
    lam = H.partialPivLu().solve(rhs);
  } else {
    lam = H.completeOrthogonalDecomposition().solve(rhs);
  }
  c.a = -f.Pinv_q;
  for (int r = 0; r < m; ++r) {
    c.lambda(S[r]) = lam(r);
    c.a -= lam(r) * f.Pinv_Kt.col(S[r]);
  }
  return c;
}

double problem_scale(const QuadraticGame& q, const ConstraintSet& cs) {
  double scale = 1.0 + q.q().cwiseAbs().maxCoeff() + q.P().cwiseAbs().maxCoeff();
  if (cs.num_constraints() > 0) scale += cs.l().cwiseAbs().maxCoeff() + cs.K().cwiseAbs().maxCoeff();
  return scale;
}

}  // namespace

OracleSolution solve_vgne(const GameSpec& game, double tol) {
  const QuadraticGame& q = require_quadratic(game);
  const ConstraintSet& cs = game.constraints();
  const Matrix& K = cs.K();
  const Vector& l = cs.l();
  const int n = cs.num_constraints();
  const Factorized f = factorize(q, K);
  const double check = std::max(tol, 1e-9) * problem_scale(q, cs);

  std::optional<Candidate> best;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    const std::vector<int> S = mask_indices(mask, n);
    Candidate c = solve_on_support(f, K, l, S, 0.0);
    if (!c.a.allFinite() || !c.lambda.allFinite()) continue;
    if (n > 0) {
      if (c.lambda.minCoeff() < -check) continue;
      const Vector g = K * c.a - l;
      if (g.maxCoeff() > check) continue;
      bool consistent = true;
      for (int j : S) consistent = consistent && std::abs(g(j)) <= check;
      if (!consistent) continue;
    }
    if (!best || c.lambda.norm() < best->lambda.norm() - 1e-14) best = std::move(c);
  }

  if (!best) {
    if (n > 0 && check_slater(K, l).best_max_violation > check)
      throw InfeasibleError("coupling constraint set is empty");
    throw OracleError("no active set satisfies the KKT conditions (assumptions violated?)");
  }

  OracleSolution sol{JointAction(game.layout(), best->a), best->lambda.cwiseMax(0.0), {}, 0, 0, 0};
  const Vector g = n > 0 ? Vector(K * sol.primal.flat() - l) : Vector::Zero(0);
  sol.stationarity_residual = (q.pseudo_gradient(sol.primal.flat()) + K.transpose() * sol.dual).norm();
  for (int j = 0; j < n; ++j) {
    sol.complementarity_residual = std::max(sol.complementarity_residual, std::abs(sol.dual(j) * g(j)));
    sol.feasibility_residual = std::max(sol.feasibility_residual, g(j));
    if (std::abs(g(j)) <= check) sol.active_set.push_back(j);
  }
  return sol;
}

RegularizedSolution solve_regularized_vi(const GameSpec& game, double eps, double tol) {
  if (!(eps > 0.0)) throw Error("regularized VI requires eps > 0");
  const QuadraticGame& q = require_quadratic(game);
  const ConstraintSet& cs = game.constraints();
  const Matrix& K = cs.K();
  const Vector& l = cs.l();
  const int n = cs.num_constraints();
  const Factorized f = factorize(q, K);
  const double check = std::max(tol, 1e-9) * problem_scale(q, cs);

  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    const std::vector<int> S = mask_indices(mask, n);
    Candidate c = solve_on_support(f, K, l, S, eps);
    if (!c.a.allFinite() || !c.lambda.allFinite()) continue;
    if (n > 0) {
      if (c.lambda.minCoeff() < -check) continue;
      // Inactive rows need -g_j + eps * 0 >= 0.
      const Vector g = K * c.a - l;
      bool ok = true;
      for (int j = 0; j < n && ok; ++j)
        if (!(mask & (1UL << j))) ok = g(j) <= check;
      if (!ok) continue;
    }
    RegularizedSolution sol{JointAction(game.layout(), c.a), c.lambda.cwiseMax(0.0), eps, {}, 0, 0, 0};
    const Vector g = K * sol.primal.flat() - l;
    sol.stationarity_residual = (q.pseudo_gradient(sol.primal.flat()) + K.transpose() * sol.dual).norm();
    for (int j = 0; j < n; ++j) {
      sol.complementarity_residual =
          std::max(sol.complementarity_residual, std::abs(sol.dual(j) * (g(j) - eps * sol.dual(j))));
      if (sol.dual(j) > 0.0) sol.active_set.push_back(j);
    }
    return sol;
  }
  if (n > 0 && check_slater(K, l).best_max_violation > check) throw InfeasibleError("coupling constraint set is empty");
  throw OracleError("no active set satisfies the regularized complementarity system");
}

RegularizedSolution solve_regularized_vi_extragradient(const GameSpec& game, double eps, double tol, long max_iter) {
  if (!(eps >= 0.0)) throw Error("regularization weight must be nonnegative");
  const int D = game.dim();
  const int n = game.num_constraints();
  const double lip = lipschitz_constant(game) + game.constraints().norm_K() + eps;
  const double step = 1.0 / (2.0 * lip);
  const RegularizationState reg{eps};

  auto project = [D](Vector z) {
    z.tail(z.size() - D) = z.tail(z.size() - D).cwiseMax(0.0);
    return z;
  };
  auto op = [&](const Vector& z) {
    return regularized_pseudo_gradient(game, AugmentedPoint::split(game.layout(), z), reg);
  };

  Vector z = Vector::Zero(D + n);
  long it = 0;
  for (; it < max_iter; ++it) {
    const Vector w = op(z);
    if ((z - project(z - w)).norm() <= tol) break;
    const Vector half = project(z - step * w);
    z = project(z - step * op(half));
  }
  if (it == max_iter) throw OracleError("extragradient did not reach the requested residual");

  AugmentedPoint pt = AugmentedPoint::split(game.layout(), z);
  RegularizedSolution sol{pt.primal, pt.dual, eps, {}, 0, 0, it};
  const Vector g = constraint_value(game.constraints(), pt.primal.flat());
  sol.stationarity_residual =
      (pseudo_gradient(game, pt.primal.flat()) + game.constraints().K().transpose() * pt.dual).norm();
  for (int j = 0; j < n; ++j) {
    sol.complementarity_residual = std::max(sol.complementarity_residual, std::abs(pt.dual(j) * (g(j) - eps * pt.dual(j))));
    if (pt.dual(j) > 0.0) sol.active_set.push_back(j);
  }
  return sol;
}

AugmentedPoint reference_equilibrium(const GameSpec& game) {
  if (game.quadratic()) {
    OracleSolution s = solve_vgne(game);
    return {std::move(s.primal), std::move(s.dual)};
  }
  RegularizedSolution s = solve_regularized_vi_extragradient(game, 0.0, 1e-11);
  return {std::move(s.primal), std::move(s.dual)};
}

std::vector<AugmentedPoint> first_order_trajectory(const GameSpec& game, const Schedules& sched, long T,
                                                   std::optional<AugmentedPoint> start) {
  if (T < 0) throw Error("trajectory length must be nonnegative");
  AugmentedPoint z = start ? *start
                           : AugmentedPoint{JointAction::zeros(game.layout()), Vector::Zero(game.num_constraints())};
  if (z.primal.flat().size() != game.dim()) throw DimensionError("initial primal point", game.dim(), z.primal.flat().size());
  if (z.dual.size() != game.num_constraints()) throw DimensionError("initial dual point", game.num_constraints(), z.dual.size());

  std::vector<AugmentedPoint> out;
  out.reserve(static_cast<std::size_t>(T) + 1);
  out.push_back(z);
  const int D = game.dim();
  const int n = game.num_constraints();
  for (long t = 1; t <= T; ++t) {
    const double gamma = sched.gamma(t);
    const double eps = sched.epsilon(t);
    const Vector w = extended_pseudo_gradient(game, z);
    z.primal.flat() -= gamma * primal_block(w, D, n);
    // w's dual block is -g(mu).
    z.dual = (z.dual - gamma * (w.tail(n) + eps * z.dual)).cwiseMax(0.0);
    out.push_back(z);
  }
  return out;
}

}  // namespace vgne
