#pragma once

#include "vgne/game.hpp"

namespace vgne {

/// z = [a, lambda] in R^D x R^n.
struct AugmentedPoint {
  JointAction primal;
  Vector dual;

  /// Flat [a, lambda].
  Vector concatenated() const;
  static AugmentedPoint split(const BlockLayout& layout, const Vector& z);
};

/// Tikhonov weight epsilon_t acting on the dual block only.
struct RegularizationState {
  double epsilon = 0.0;
};

/// U^i(a, lambda) = J^i(a) + <lambda, K a - l>.
double augmented_cost(const GameSpec& game, int player, const AugmentedPoint& z);

/// U^{N+1}(a, lambda) = -<lambda, K a - l>.
double dual_cost(const GameSpec& game, const AugmentedPoint& z);

/// W(z): primal block M(a) + K^T lambda, dual block -K a + l.
Vector extended_pseudo_gradient(const GameSpec& game, const AugmentedPoint& z);

/// First D coordinates of a vector laid out like W(z).
Vector primal_block(const Vector& w, int primal_dim, int dual_dim);

/// W_t(z) = W(z) + [0, epsilon * lambda].
Vector regularized_pseudo_gradient(const GameSpec& game, const AugmentedPoint& z,
                                   RegularizationState eps);

}  // namespace vgne
