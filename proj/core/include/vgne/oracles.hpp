#pragma once

#include <optional>
#include <vector>

#include "vgne/augmented.hpp"
#include "vgne/game.hpp"
#include "vgne/schedules.hpp"

namespace vgne {

/// Variational GNE with a certified KKT multiplier.
struct OracleSolution {
  JointAction primal;
  Vector dual;
  std::vector<int> active_set;  ///< constraints binding at the primal point
  double stationarity_residual = 0.0;      ///< ||M(a*) + K^T lambda*||
  double complementarity_residual = 0.0;   ///< max_j |lambda*_j g_j(a*)|
  double feasibility_residual = 0.0;       ///< max(0, max_j g_j(a*))
};

/// Solution of the Tikhonov-regularized VI (active constraints satisfy g_j = eps lambda_j).
struct RegularizedSolution {
  JointAction primal;
  Vector dual;
  double epsilon = 0.0;
  std::vector<int> active_set;  ///< constraints with positive multiplier
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;  ///< max_j |lambda_j (g_j - eps lambda_j)|
  long iterations = 0;                    ///< extragradient iterations (0 for the exact solver)
};

/// Largest constraint count accepted by the enumeration solvers.
inline constexpr int kMaxEnumeratedConstraints = 20;

/// Unique v-GNE of a quadratic game by active-set enumeration over the KKT system
///   P a + q + K^T lambda = 0,  lambda >= 0,  K a - l <= 0,  lambda_j g_j = 0.
/// When multipliers are not unique the minimal-norm one is returned.
/// Throws OracleError for non-quadratic or non-monotone games and when no active
/// set certifies; InfeasibleError when the constraint set is empty.
OracleSolution solve_vgne(const GameSpec& game, double tol = 1e-10);

/// Unique solution of the regularized VI with weight eps > 0 on the dual block.
RegularizedSolution solve_regularized_vi(const GameSpec& game, double eps, double tol = 1e-10);

/// Projected extragradient on W_eps with step 1 / (2 (L + ||K|| + eps)). Works for
/// any game (black-box costs use finite-difference pseudo-gradients); eps = 0
/// targets the unregularized VI. Stops when the natural residual
/// ||z - Proj(z - W_eps(z))|| drops below tol.
RegularizedSolution solve_regularized_vi_extragradient(const GameSpec& game, double eps,
                                                       double tol = 1e-12,
                                                       long max_iter = 5'000'000);

/// (a*, lambda*) used as the error reference for learning runs: exact for quadratic
/// games, extragradient on the unregularized VI otherwise.
AugmentedPoint reference_equilibrium(const GameSpec& game);

/// Exact-gradient counterpart of the payoff-based learner:
///   mu     <- mu - gamma_t W^pr(mu, lambda)
///   lambda <- Proj_{>=0}[lambda - gamma_t(-g(mu) + eps_t lambda)]
/// Returns T + 1 points starting with the initial one.
std::vector<AugmentedPoint> first_order_trajectory(const GameSpec& game, const Schedules& sched, long T,
                                                   std::optional<AugmentedPoint> start = std::nullopt);

}  // namespace vgne
