#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vgne {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Partition of the joint action space R^D into per-player blocks.
/// Cheap to copy; the block table is shared.
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<int> dims);

  int num_players() const { return static_cast<int>(data_->dims.size()); }
  int total_dim() const { return data_->total; }
  int dim(int player) const;
  int offset(int player) const;
  const std::vector<int>& dims() const { return data_->dims; }

  bool operator==(const BlockLayout& other) const {
    return data_ == other.data_ || data_->dims == other.data_->dims;
  }

 private:
  struct Data {
    std::vector<int> dims;
    std::vector<int> offsets;
    int total = 0;
  };
  std::shared_ptr<const Data> data_;
};

/// Joint action a = [a^1, ..., a^N] with both a flat and a per-player view.
class JointAction {
 public:
  JointAction(BlockLayout layout, Vector flat);

  static JointAction zeros(const BlockLayout& layout);
  static JointAction from_blocks(const std::vector<Vector>& blocks);

  const BlockLayout& layout() const { return layout_; }
  const Vector& flat() const { return flat_; }
  Vector& flat() { return flat_; }

  Eigen::VectorBlock<const Vector> block(int player) const;
  Eigen::VectorBlock<Vector> block(int player);
  std::vector<Vector> blocks() const;

 private:
  BlockLayout layout_;
  Vector flat_;
};

/// Shared affine coupling constraints g(a) = K a - l <= 0.
class ConstraintSet {
 public:
  /// Validates shapes and runs the Slater check; throws InfeasibleError when
  /// no strictly feasible point is found.
  ConstraintSet(Matrix K, Vector l);

  /// No constraints over R^dim.
  static ConstraintSet none(int dim);

  /// Skips the Slater check. Only meant for exercising solver error paths.
  static ConstraintSet unchecked(Matrix K, Vector l);

  const Matrix& K() const { return K_; }
  const Vector& l() const { return l_; }
  int num_constraints() const { return static_cast<int>(l_.size()); }
  int dim() const { return static_cast<int>(K_.cols()); }

  /// Spectral norm of K (0 when there are no constraints).
  double norm_K() const;

 private:
  struct Unchecked {};
  ConstraintSet(Matrix K, Vector l, Unchecked);

  Matrix K_;
  Vector l_;
};

Vector constraint_value(const ConstraintSet& cs, const Vector& a);

struct SlaterResult {
  bool strictly_feasible = false;
  double best_max_violation = 0.0;  ///< min over iterates of max_j g_j(a)
  Vector point;
};

/// Subgradient descent on a -> max_j g_j(a) started from the origin.
SlaterResult check_slater(const Matrix& K, const Vector& l, int max_iter = 4000);

/// Quadratic game J^i(a) = 1/2 a^T A_i a + b_i^T a with pseudo-gradient
/// M(a) = P a + q, where row-block i of P is row-block i of sym(A_i).
class QuadraticGame {
 public:
  QuadraticGame(BlockLayout layout, std::vector<Matrix> A, std::vector<Vector> b);

  /// Builds per-player cost matrices realizing the given pseudo-gradient.
  /// The diagonal blocks P_ii must be symmetric (they are Hessians of J^i in a^i).
  static QuadraticGame from_pseudo_gradient(BlockLayout layout, const Matrix& P,
                                            const Vector& q);

  const BlockLayout& layout() const { return layout_; }
  const std::vector<Matrix>& A() const { return A_; }
  const std::vector<Vector>& b() const { return b_; }
  const Matrix& P() const { return P_; }
  const Vector& q() const { return q_; }

  double cost(int player, const Vector& a) const;
  Vector pseudo_gradient(const Vector& a) const { return P_ * a + q_; }

  /// Smallest eigenvalue of the symmetric part of P.
  double strong_monotonicity() const { return nu_; }
  /// Largest singular value of P.
  double lipschitz() const { return lipschitz_; }

 private:
  BlockLayout layout_;
  std::vector<Matrix> A_;
  std::vector<Vector> b_;
  Matrix P_;
  Vector q_;
  double nu_ = 0.0;
  double lipschitz_ = 0.0;
};

using CostFn = std::function<double(const Vector&)>;
using PseudoGradientFn = std::function<Vector(const Vector&)>;

/// A game with N players, per-player costs over R^D and shared affine constraints.
/// Immutable once built.
class GameSpec {
 public:
  GameSpec(BlockLayout layout, std::vector<CostFn> costs, ConstraintSet constraints);
  GameSpec(QuadraticGame game, ConstraintSet constraints);

  GameSpec& with_name(std::string name);
  GameSpec& with_known_nu(double nu);
  GameSpec& with_known_lipschitz(double lipschitz);
  /// Analytic pseudo-gradient for black-box costs (replaces finite differences).
  GameSpec& with_pseudo_gradient(PseudoGradientFn fn);

  const std::string& name() const { return name_; }
  const BlockLayout& layout() const { return layout_; }
  int num_players() const { return layout_.num_players(); }
  int dim() const { return layout_.total_dim(); }
  int num_constraints() const { return constraints_.num_constraints(); }
  const ConstraintSet& constraints() const { return constraints_; }
  const std::vector<CostFn>& costs() const { return costs_; }
  const QuadraticGame* quadratic() const { return quadratic_ ? &*quadratic_ : nullptr; }
  bool has_analytic_gradient() const { return quadratic_.has_value() || bool(gradient_); }
  const PseudoGradientFn& analytic_gradient() const { return gradient_; }

  std::optional<double> known_nu() const { return known_nu_; }
  std::optional<double> known_lipschitz() const { return known_lipschitz_; }

 private:
  std::string name_ = "game";
  BlockLayout layout_;
  std::vector<CostFn> costs_;
  ConstraintSet constraints_;
  std::optional<QuadraticGame> quadratic_;
  PseudoGradientFn gradient_;
  std::optional<double> known_nu_;
  std::optional<double> known_lipschitz_;
};

/// J^i(a). Players are indexed from 0.
double evaluate_cost(const GameSpec& game, int player, const Vector& a);

/// M(a) = [dJ^1/da^1, ..., dJ^N/da^N]. Exact for quadratic games or when an analytic
/// gradient is attached; otherwise central finite differences with step
/// 1e-6 * (1 + ||a||), which is accurate to roughly 1e-8 relative.
Vector pseudo_gradient(const GameSpec& game, const Vector& a);

struct ProbeResult {
  double estimate = 0.0;
  bool flagged = false;  ///< monotonicity probe: estimate <= 0
  int pairs_used = 0;    ///< pairs with a1 != a2
};

/// min over random pairs in [-radius, radius]^D of <M(a1)-M(a2), a1-a2> / ||a1-a2||^2.
ProbeResult probe_monotonicity(const GameSpec& game, int num_pairs, double radius,
                               std::uint64_t seed);

/// max over random pairs of ||M(a1)-M(a2)|| / ||a1-a2||.
ProbeResult probe_lipschitz(const GameSpec& game, int num_pairs, double radius,
                            std::uint64_t seed);

/// Same probes over caller-supplied pairs (degenerate pairs are skipped).
ProbeResult probe_monotonicity_pairs(const GameSpec& game,
                                     const std::vector<std::pair<Vector, Vector>>& pairs);
ProbeResult probe_lipschitz_pairs(const GameSpec& game,
                                  const std::vector<std::pair<Vector, Vector>>& pairs);

/// Strong monotonicity constant: user-supplied, eigenvalue-exact for quadratic
/// games, otherwise probed.
double monotonicity_constant(const GameSpec& game);
/// Lipschitz constant of M with the same precedence.
double lipschitz_constant(const GameSpec& game);

}  // namespace vgne
