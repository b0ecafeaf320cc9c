#include "vgne/augmented.hpp"

#include "vgne/error.hpp"

namespace vgne {

Vector AugmentedPoint::concatenated() const {
  Vector z(primal.flat().size() + dual.size());
  z << primal.flat(), dual;
  return z;
}

AugmentedPoint AugmentedPoint::split(const BlockLayout& layout, const Vector& z) {
  const int D = layout.total_dim();
  if (z.size() < D) throw DimensionError("augmented point", D, z.size());
  return AugmentedPoint{JointAction(layout, z.head(D)), z.tail(z.size() - D)};
}

namespace {

void check_dims(const GameSpec& game, const AugmentedPoint& z) {
  if (z.primal.flat().size() != game.dim()) throw DimensionError("augmented point primal part", game.dim(), z.primal.flat().size());
  if (z.dual.size() != game.num_constraints())
    throw DimensionError("augmented point dual part", game.num_constraints(), z.dual.size());
}

}  // namespace

double augmented_cost(const GameSpec& game, int player, const AugmentedPoint& z) {
  check_dims(game, z);
  const Vector& a = z.primal.flat();
  return evaluate_cost(game, player, a) + z.dual.dot(constraint_value(game.constraints(), a));
}

double dual_cost(const GameSpec& game, const AugmentedPoint& z) {
  check_dims(game, z);
  return -z.dual.dot(constraint_value(game.constraints(), z.primal.flat()));
}

Vector extended_pseudo_gradient(const GameSpec& game, const AugmentedPoint& z) {
  check_dims(game, z);
  const Vector& a = z.primal.flat();
  const Matrix& K = game.constraints().K();
  Vector w(game.dim() + game.num_constraints());
  w.head(game.dim()) = pseudo_gradient(game, a) + K.transpose() * z.dual;
  w.tail(game.num_constraints()) = -constraint_value(game.constraints(), a);
  return w;
}

Vector primal_block(const Vector& w, int primal_dim, int dual_dim) {
  if (w.size() != primal_dim + dual_dim) throw DimensionError("primal_block input", primal_dim + dual_dim, w.size());
  return w.head(primal_dim);
}

Vector regularized_pseudo_gradient(const GameSpec& game, const AugmentedPoint& z, RegularizationState eps) {
  if (!(eps.epsilon >= 0.0)) throw Error("regularization weight must be nonnegative");
  Vector w = extended_pseudo_gradient(game, z);
  w.tail(game.num_constraints()) += eps.epsilon * z.dual;
  return w;
}

}  // namespace vgne
