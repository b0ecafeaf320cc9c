#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgne/game.hpp"

namespace vgne {

/// Two scalar players with J^1 = 3/2 (a^1)^2 + a^1 a^2, J^2 = 1/2 (a^2)^2 - a^1 a^2
/// and the shared constraint a^1 + a^2 >= 1. Its v-GNE is a* = [0, 1], lambda* = 1.
GameSpec paper_example();

/// Parameters of the smooth non-quadratic family
///   J^i(a) = J^i_quad(a) + weight * h(k^T a),  h(x) = tau^2 softplus(x / tau)^2 / 2.
/// h is convex with h'' <= 1.3, so M stays strongly monotone with the quadratic's
/// constant and its Lipschitz constant grows by at most 1.3 * weight * ||k||^2.
/// For tau much smaller than the sampling radius h' behaves like max(0, x),
/// which makes the Gaussian smoothing bias at k^T mu = 0 linear in sigma.
struct SoftplusCoupling {
  Vector direction;      ///< k, length D
  double weight = 2.0;   ///< coupling weight
  double temperature = 1e-3;  ///< tau
};

/// Numerically stable log(1 + e^x).
double softplus(double x);

/// Quadratic base plus the coupling term shared by every player.
GameSpec softplus_coupled(const QuadraticGame& base, const ConstraintSet& constraints,
                          const SoftplusCoupling& coupling);

/// paper_example() plus the coupling with k = [1, 1].
GameSpec softplus_coupled_example();

struct RandomGameOptions {
  int min_players = 2;
  int max_players = 3;
  int max_player_dim = 2;
  int max_constraints = 3;
  double min_eigenvalue = 0.5;  ///< lower bound added to the symmetric part of P
};

/// Seeded random strongly monotone quadratic game with jointly linear constraints.
/// Constraints are positioned so that most of them bind at the v-GNE, and the
/// set always has a strictly feasible point.
GameSpec random_quadratic(std::uint64_t seed, const RandomGameOptions& opts = {});

/// Names accepted by make_builtin().
std::vector<std::string> builtin_names();

/// "paper-example", "softplus-coupled" or "random-quadratic" (uses seed).
GameSpec make_builtin(const std::string& name, std::uint64_t seed = 0);

}  // namespace vgne
