#include "vgne/builtins.hpp"

#include <cmath>
#include <random>

#include "vgne/error.hpp"

namespace vgne {

GameSpec paper_example() {
  BlockLayout layout({1, 1});
  Matrix A1(2, 2), A2(2, 2);
  A1 << 3.0, 1.0,
        1.0, 0.0;
  A2 << 0.0, -1.0,
       -1.0, 1.0;
  QuadraticGame game(layout, {A1, A2}, {Vector::Zero(2), Vector::Zero(2)});
  Matrix K(1, 2);
  K << -1.0, -1.0;
  Vector l(1);
  l << -1.0;
  GameSpec spec(std::move(game), ConstraintSet(K, l));
  spec.with_name("paper-example");
  return spec;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

GameSpec softplus_coupled(const QuadraticGame& base, const ConstraintSet& constraints,
                          const SoftplusCoupling& coupling) {
  const int D = base.layout().total_dim();
  if (coupling.direction.size() != D) throw DimensionError("coupling direction", D, coupling.direction.size());
  if (!(coupling.temperature > 0.0)) throw Error("coupling temperature must be positive");
  const Vector k = coupling.direction;
  const double w = coupling.weight;
  const double tau = coupling.temperature;

  auto h = [tau](double x) {
    const double s = softplus(x / tau);
    return 0.5 * tau * tau * s * s;
  };
  auto dh = [tau](double x) { return tau * softplus(x / tau) * sigmoid(x / tau); };

  std::vector<CostFn> costs;
  for (int i = 0; i < base.layout().num_players(); ++i) {
    costs.push_back([A = base.A()[i], b = base.b()[i], k, w, h](const Vector& a) {
      return 0.5 * a.dot(A * a) + b.dot(a) + w * h(k.dot(a));
    });
  }
  GameSpec spec(base.layout(), std::move(costs), constraints);
  spec.with_pseudo_gradient([P = base.P(), q = base.q(), k, w, dh](const Vector& a) -> Vector {
    return P * a + q + (w * dh(k.dot(a))) * k;
  });
  spec.with_known_nu(base.strong_monotonicity());
  spec.with_known_lipschitz(base.lipschitz() + 1.3 * std::abs(w) * k.squaredNorm());
  spec.with_name("softplus-coupled");
  return spec;
}

GameSpec softplus_coupled_example() {
  const GameSpec base = paper_example();
  SoftplusCoupling coupling;
  coupling.direction = Vector::Ones(2);
  return softplus_coupled(*base.quadratic(), base.constraints(), coupling);
}

GameSpec random_quadratic(std::uint64_t seed, const RandomGameOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  const int N = uniform_int(opts.min_players, opts.max_players);
  std::vector<int> dims(N);
  for (int& d : dims) d = uniform_int(1, opts.max_player_dim);
  BlockLayout layout(dims);
  const int D = layout.total_dim();

  Matrix X(D, D);
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) X(r, c) = normal(rng);
  Matrix sym = X * X.transpose() / D + opts.min_eigenvalue * Matrix::Identity(D, D);
  Matrix Y(D, D);
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) Y(r, c) = normal(rng);
  Matrix skew = 0.5 * (Y - Y.transpose());
  for (int i = 0; i < N; ++i)
    skew.block(layout.offset(i), layout.offset(i), layout.dim(i), layout.dim(i)).setZero();
  const Matrix P = sym + skew;
  Vector q(D);
  for (int k = 0; k < D; ++k) q(k) = normal(rng);
  QuadraticGame game = QuadraticGame::from_pseudo_gradient(layout, P, q);

  const int n = uniform_int(1, std::min(opts.max_constraints, D));
  Matrix K(n, D);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < D; ++c) K(r, c) = normal(rng);
  // Unconstrained equilibrium; cut most rows below it so they bind.
  const Vector free_eq = -P.partialPivLu().solve(q);
  Vector l(n);
  for (int r = 0; r < n; ++r) {
    const double shift = 0.2 + unif(rng);
    const bool bind = unif(rng) < 0.8;
    l(r) = K.row(r).dot(free_eq) + (bind ? -shift : shift);
  }
  GameSpec spec(std::move(game), ConstraintSet(K, l));
  spec.with_name("random-quadratic-" + std::to_string(seed));
  return spec;
}

std::vector<std::string> builtin_names() { return {"paper-example", "softplus-coupled", "random-quadratic"}; }

GameSpec make_builtin(const std::string& name, std::uint64_t seed) {
  if (name == "paper-example") return paper_example();
  if (name == "softplus-coupled") return softplus_coupled_example();
  if (name == "random-quadratic") return random_quadratic(seed);
  throw ConfigError("unknown builtin game '" + name + "'");
}

}  // namespace vgne
