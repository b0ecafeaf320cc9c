#include "vgne/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "vgne/error.hpp"

namespace vgne {

BlockLayout::BlockLayout(std::vector<int> dims) {
  auto data = std::make_shared<Data>();
  if (dims.empty()) throw Error("game must have at least one player");
  int offset = 0;
  for (int d : dims) {
    if (d <= 0) throw Error("player dimensions must be positive");
    data->offsets.push_back(offset);
    offset += d;
  }
  data->total = offset;
  data->dims = std::move(dims);
  data_ = std::move(data);
}

int BlockLayout::dim(int player) const {
  if (player < 0 || player >= num_players())
    throw Error("player index " + std::to_string(player) + " out of range");
  return data_->dims[player];
}

int BlockLayout::offset(int player) const {
  if (player < 0 || player >= num_players())
    throw Error("player index " + std::to_string(player) + " out of range");
  return data_->offsets[player];
}

JointAction::JointAction(BlockLayout layout, Vector flat)
    : layout_(std::move(layout)), flat_(std::move(flat)) {
  if (flat_.size() != layout_.total_dim())
    throw DimensionError("joint action", layout_.total_dim(), flat_.size());
}

JointAction JointAction::zeros(const BlockLayout& layout) {
  return JointAction(layout, Vector::Zero(layout.total_dim()));
}

JointAction JointAction::from_blocks(const std::vector<Vector>& blocks) {
  std::vector<int> dims;
  dims.reserve(blocks.size());
  for (const auto& b : blocks) dims.push_back(static_cast<int>(b.size()));
  BlockLayout layout(std::move(dims));
  Vector flat(layout.total_dim());
  for (int i = 0; i < layout.num_players(); ++i)
    flat.segment(layout.offset(i), layout.dim(i)) = blocks[i];
  return JointAction(layout, std::move(flat));
}

Eigen::VectorBlock<const Vector> JointAction::block(int player) const {
  return flat_.segment(layout_.offset(player), layout_.dim(player));
}

Eigen::VectorBlock<Vector> JointAction::block(int player) {
  return flat_.segment(layout_.offset(player), layout_.dim(player));
}

std::vector<Vector> JointAction::blocks() const {
  std::vector<Vector> out;
  out.reserve(layout_.num_players());
  for (int i = 0; i < layout_.num_players(); ++i) out.emplace_back(block(i));
  return out;
}

// ---------------------------------------------------------------------------
// Constraints

ConstraintSet::ConstraintSet(Matrix K, Vector l, Unchecked) : K_(std::move(K)), l_(std::move(l)) {
  if (K_.rows() != l_.size()) throw DimensionError("constraint vector l", K_.rows(), l_.size());
  if (K_.cols() <= 0) throw Error("constraint matrix must have at least one column");
}

ConstraintSet::ConstraintSet(Matrix K, Vector l) : ConstraintSet(std::move(K), std::move(l), Unchecked{}) {
  if (num_constraints() == 0) return;
  const SlaterResult slater = check_slater(K_, l_);
  if (!slater.strictly_feasible)
    throw InfeasibleError("coupling constraints admit no strictly feasible point (best max_j g_j = " +
                          std::to_string(slater.best_max_violation) + ")");
}

ConstraintSet ConstraintSet::none(int dim) { return ConstraintSet(Matrix::Zero(0, dim), Vector::Zero(0), Unchecked{}); }

ConstraintSet ConstraintSet::unchecked(Matrix K, Vector l) {
  return ConstraintSet(std::move(K), std::move(l), Unchecked{});
}

double ConstraintSet::norm_K() const {
  if (K_.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(K_);
  return svd.singularValues()(0);
}

Vector constraint_value(const ConstraintSet& cs, const Vector& a) {
  if (a.size() != cs.dim()) throw DimensionError("constraint_value", cs.dim(), a.size());
  return cs.K() * a - cs.l();
}

SlaterResult check_slater(const Matrix& K, const Vector& l, int max_iter) {
  SlaterResult result;
  const int dim = static_cast<int>(K.cols());
  result.point = Vector::Zero(dim);
  if (K.rows() == 0) {
    result.strictly_feasible = true;
    result.best_max_violation = -std::numeric_limits<double>::infinity();
    return result;
  }
  const double scale = 1.0 + l.cwiseAbs().maxCoeff();
  const double margin = -1e-9 * scale;

  Vector a = Vector::Zero(dim);
  result.best_max_violation = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iter; ++k) {
    const Vector g = K * a - l;
    Eigen::Index worst = 0;
    const double value = g.maxCoeff(&worst);
    if (value < result.best_max_violation) {
      result.best_max_violation = value;
      result.point = a;
    }
    if (value < margin) break;
    const Vector row = K.row(worst).transpose();
    const double row_norm = row.norm();
    if (row_norm == 0.0) break;  // worst constraint is constant and violated
    const double step = scale / std::sqrt(k + 1.0);
    a -= step * row / row_norm;
  }
  result.strictly_feasible = result.best_max_violation < margin;
  return result;
}

// ---------------------------------------------------------------------------
// Quadratic games

namespace {

void analyze_pseudo_gradient(const Matrix& P, double& nu, double& lipschitz) {
  const Matrix sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  nu = eig.eigenvalues()(0);
  Eigen::JacobiSVD<Matrix> svd(P);
  lipschitz = svd.singularValues()(0);
}

}  // namespace

QuadraticGame::QuadraticGame(BlockLayout layout, std::vector<Matrix> A, std::vector<Vector> b)
    : layout_(std::move(layout)), A_(std::move(A)), b_(std::move(b)) {
  const int n = layout_.num_players();
  const int D = layout_.total_dim();
  if (static_cast<int>(A_.size()) != n) throw DimensionError("quadratic cost matrices", n, A_.size());
  if (static_cast<int>(b_.size()) != n) throw DimensionError("quadratic cost vectors", n, b_.size());
  P_.resize(D, D);
  q_.resize(D);
  for (int i = 0; i < n; ++i) {
    if (A_[i].rows() != D || A_[i].cols() != D)
      throw DimensionError("cost matrix A_" + std::to_string(i), D, A_[i].rows());
    if (b_[i].size() != D) throw DimensionError("cost vector b_" + std::to_string(i), D, b_[i].size());
    A_[i] = 0.5 * (A_[i] + A_[i].transpose()).eval();
    const int off = layout_.offset(i);
    const int d = layout_.dim(i);
    P_.middleRows(off, d) = A_[i].middleRows(off, d);
    q_.segment(off, d) = b_[i].segment(off, d);
  }
  analyze_pseudo_gradient(P_, nu_, lipschitz_);
}

QuadraticGame QuadraticGame::from_pseudo_gradient(BlockLayout layout, const Matrix& P, const Vector& q) {
  const int D = layout.total_dim();
  if (P.rows() != D || P.cols() != D) throw DimensionError("pseudo-gradient matrix", D, P.rows());
  if (q.size() != D) throw DimensionError("pseudo-gradient offset", D, q.size());
  std::vector<Matrix> A;
  std::vector<Vector> b;
  for (int i = 0; i < layout.num_players(); ++i) {
    const int off = layout.offset(i);
    const int d = layout.dim(i);
    const Matrix Pii = P.block(off, off, d, d);
    if ((Pii - Pii.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Pii.cwiseAbs().maxCoeff()))
      throw Error("diagonal block " + std::to_string(i) + " of the pseudo-gradient matrix is not symmetric");
    Matrix Ai = Matrix::Zero(D, D);
    Ai.middleRows(off, d) = P.middleRows(off, d);
    Ai.middleCols(off, d) = P.middleRows(off, d).transpose();
    Ai.block(off, off, d, d) = Pii;
    Vector bi = Vector::Zero(D);
    bi.segment(off, d) = q.segment(off, d);
    A.push_back(std::move(Ai));
    b.push_back(std::move(bi));
  }
  return QuadraticGame(std::move(layout), std::move(A), std::move(b));
}

double QuadraticGame::cost(int player, const Vector& a) const {
  if (a.size() != layout_.total_dim()) throw DimensionError("evaluate_cost", layout_.total_dim(), a.size());
  const Matrix& A = A_.at(player);
  return 0.5 * a.dot(A * a) + b_[player].dot(a);
}

// ---------------------------------------------------------------------------
// GameSpec

GameSpec::GameSpec(BlockLayout layout, std::vector<CostFn> costs, ConstraintSet constraints)
    : layout_(std::move(layout)), costs_(std::move(costs)), constraints_(std::move(constraints)) {
  if (static_cast<int>(costs_.size()) != layout_.num_players())
    throw DimensionError("cost evaluators", layout_.num_players(), costs_.size());
  if (constraints_.dim() != layout_.total_dim())
    throw DimensionError("constraint matrix columns", layout_.total_dim(), constraints_.dim());
}

GameSpec::GameSpec(QuadraticGame game, ConstraintSet constraints)
    : layout_(game.layout()), constraints_(std::move(constraints)) {
  if (constraints_.dim() != layout_.total_dim())
    throw DimensionError("constraint matrix columns", layout_.total_dim(), constraints_.dim());
  quadratic_.emplace(std::move(game));
  const QuadraticGame* q = &*quadratic_;
  for (int i = 0; i < layout_.num_players(); ++i) {
    // Captures copies so the evaluator stays valid if the spec is moved.
    costs_.push_back([A = q->A()[i], b = q->b()[i]](const Vector& a) { return 0.5 * a.dot(A * a) + b.dot(a); });
  }
}

GameSpec& GameSpec::with_name(std::string name) {
  name_ = std::move(name);
  return *this;
}

GameSpec& GameSpec::with_known_nu(double nu) {
  if (!(nu > 0.0)) throw Error("known strong-monotonicity constant must be positive");
  known_nu_ = nu;
  return *this;
}

GameSpec& GameSpec::with_known_lipschitz(double lipschitz) {
  if (!(lipschitz > 0.0)) throw Error("known Lipschitz constant must be positive");
  known_lipschitz_ = lipschitz;
  return *this;
}

GameSpec& GameSpec::with_pseudo_gradient(PseudoGradientFn fn) {
  gradient_ = std::move(fn);
  return *this;
}

double evaluate_cost(const GameSpec& game, int player, const Vector& a) {
  if (a.size() != game.dim()) throw DimensionError("evaluate_cost", game.dim(), a.size());
  if (player < 0 || player >= game.num_players())
    throw Error("player index " + std::to_string(player) + " out of range");
  return game.costs()[player](a);
}

Vector pseudo_gradient(const GameSpec& game, const Vector& a) {
  if (a.size() != game.dim()) throw DimensionError("pseudo_gradient", game.dim(), a.size());
  if (const auto* q = game.quadratic()) return q->pseudo_gradient(a);
  if (game.analytic_gradient()) return game.analytic_gradient()(a);

  const BlockLayout& layout = game.layout();
  const double h = 1e-6 * (1.0 + a.norm());
  Vector out(a.size());
  Vector x = a;
  for (int i = 0; i < layout.num_players(); ++i) {
    const CostFn& J = game.costs()[i];
    for (int k = layout.offset(i); k < layout.offset(i) + layout.dim(i); ++k) {
      x(k) = a(k) + h;
      const double plus = J(x);
      x(k) = a(k) - h;
      const double minus = J(x);
      x(k) = a(k);
      out(k) = (plus - minus) / (2.0 * h);
    }
  }
  return out;
}

namespace {

std::vector<std::pair<Vector, Vector>> sample_pairs(int dim, int num_pairs, double radius, std::uint64_t seed) {
  if (num_pairs < 1) throw Error("probe requires at least one pair");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(num_pairs);
  for (int p = 0; p < num_pairs; ++p) {
    Vector a1(dim), a2(dim);
    for (int k = 0; k < dim; ++k) a1(k) = unif(rng);
    for (int k = 0; k < dim; ++k) a2(k) = unif(rng);
    pairs.emplace_back(std::move(a1), std::move(a2));
  }
  return pairs;
}

}  // namespace

ProbeResult probe_monotonicity_pairs(const GameSpec& game, const std::vector<std::pair<Vector, Vector>>& pairs) {
  ProbeResult r;
  r.estimate = std::numeric_limits<double>::infinity();
  for (const auto& [a1, a2] : pairs) {
    const Vector d = a1 - a2;
    const double dn2 = d.squaredNorm();
    if (dn2 == 0.0) continue;
    const double ratio = (pseudo_gradient(game, a1) - pseudo_gradient(game, a2)).dot(d) / dn2;
    r.estimate = std::min(r.estimate, ratio);
    ++r.pairs_used;
  }
  if (r.pairs_used == 0) throw Error("monotonicity probe: all sampled pairs were degenerate");
  r.flagged = !(r.estimate > 0.0);
  return r;
}

ProbeResult probe_lipschitz_pairs(const GameSpec& game, const std::vector<std::pair<Vector, Vector>>& pairs) {
  ProbeResult r;
  for (const auto& [a1, a2] : pairs) {
    const double dn = (a1 - a2).norm();
    if (dn == 0.0) continue;
    r.estimate = std::max(r.estimate, (pseudo_gradient(game, a1) - pseudo_gradient(game, a2)).norm() / dn);
    ++r.pairs_used;
  }
  if (r.pairs_used == 0) throw Error("Lipschitz probe: all sampled pairs were degenerate");
  return r;
}

ProbeResult probe_monotonicity(const GameSpec& game, int num_pairs, double radius, std::uint64_t seed) {
  return probe_monotonicity_pairs(game, sample_pairs(game.dim(), num_pairs, radius, seed));
}

ProbeResult probe_lipschitz(const GameSpec& game, int num_pairs, double radius, std::uint64_t seed) {
  return probe_lipschitz_pairs(game, sample_pairs(game.dim(), num_pairs, radius, seed));
}

double monotonicity_constant(const GameSpec& game) {
  if (game.known_nu()) return *game.known_nu();
  if (const auto* q = game.quadratic()) return q->strong_monotonicity();
  return probe_monotonicity(game, 10000, 2.0, 0x5eed).estimate;
}

double lipschitz_constant(const GameSpec& game) {
  if (game.known_lipschitz()) return *game.known_lipschitz();
  if (const auto* q = game.quadratic()) return q->lipschitz();
  return probe_lipschitz(game, 10000, 2.0, 0x5eed).estimate;
}

}  // namespace vgne
