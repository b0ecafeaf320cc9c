#include <doctest.h>

#include <random>

#include "reference.hpp"
#include "vgne/builtins.hpp"
#include "vgne/error.hpp"
#include "vgne/game.hpp"
#include "vgne/game_io.hpp"

using namespace vgne;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

GameSpec isotropic_game(double scale, int dim) {
  BlockLayout layout(std::vector<int>(static_cast<std::size_t>(dim), 1));
  return GameSpec(QuadraticGame::from_pseudo_gradient(layout, scale * Matrix::Identity(dim, dim), Vector::Zero(dim)),
                  ConstraintSet::none(dim));
}

}  // namespace

TEST_CASE("block layout offsets and dimensions") {
  BlockLayout layout({2, 1, 3});
  CHECK(layout.num_players() == 3);
  CHECK(layout.total_dim() == 6);
  CHECK(layout.offset(0) == 0);
  CHECK(layout.offset(1) == 2);
  CHECK(layout.offset(2) == 3);
  CHECK(layout.dim(2) == 3);
  CHECK_THROWS_AS(BlockLayout({}), Error);
  CHECK_THROWS_AS(BlockLayout({1, 0}), Error);
}

TEST_CASE("joint action block and flat views round-trip") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> blocks;
    const int n = 1 + trial % 4;
    for (int i = 0; i < n; ++i) {
      Vector b(1 + (trial + i) % 3);
      for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = nd(rng);
      blocks.push_back(b);
    }
    const JointAction a = JointAction::from_blocks(blocks);
    const auto back = a.blocks();
    REQUIRE(back.size() == blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) CHECK(back[i] == blocks[i]);
    const JointAction again(a.layout(), a.flat());
    CHECK(again.flat() == a.flat());
  }
  JointAction a = JointAction::zeros(BlockLayout({1, 2}));
  a.block(1)(0) = 5.0;
  CHECK(a.flat()(1) == 5.0);
  CHECK_THROWS_AS(JointAction(BlockLayout({1, 2}), Vector::Zero(2)), DimensionError);
}

TEST_CASE("paper-example game costs") {
  const GameSpec g = paper_example();
  CHECK(g.name() == "paper-example");
  CHECK(evaluate_cost(g, 0, vec({1, 1})) == doctest::Approx(2.5));
  CHECK(evaluate_cost(g, 1, vec({0, 0})) == 0.0);
  CHECK(evaluate_cost(g, 1, vec({1, 1})) == doctest::Approx(0.5 - 1.0));
  CHECK(evaluate_cost(g, 0, vec({-2, 0.5})) == doctest::Approx(1.5 * 4 - 1.0));
}

TEST_CASE("cost evaluation dimension errors name expected and given sizes") {
  const GameSpec g = paper_example();
  try {
    evaluate_cost(g, 0, vec({1, 2, 3}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.expected() == 2);
    CHECK(e.given() == 3);
  }
  CHECK_THROWS_AS(evaluate_cost(g, 2, vec({1, 2})), Error);
  CHECK_THROWS_AS(evaluate_cost(g, -1, vec({1, 2})), Error);
  CHECK_THROWS_AS(pseudo_gradient(g, vec({1})), DimensionError);
  CHECK_THROWS_AS(constraint_value(g.constraints(), vec({1})), DimensionError);
}

TEST_CASE("random quadratic costs match elementwise summation") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const QuadraticGame& q = *g.quadratic();
    for (int trial = 0; trial < 5; ++trial) {
      Vector a(g.dim());
      for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = 3 * nd(rng);
      for (int i = 0; i < g.num_players(); ++i) {
        const double expected = ref::quadratic_by_summation(q.A()[static_cast<std::size_t>(i)],
                                                            q.b()[static_cast<std::size_t>(i)], a);
        CHECK(evaluate_cost(g, i, a) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pseudo-gradient of paper-example game") {
  const GameSpec g = paper_example();
  const Vector m = pseudo_gradient(g, vec({0, 1}));
  CHECK(m(0) == doctest::Approx(1.0));
  CHECK(m(1) == doctest::Approx(1.0));
  const Matrix& P = g.quadratic()->P();
  CHECK(P(0, 0) == 3);
  CHECK(P(0, 1) == 1);
  CHECK(P(1, 0) == -1);
  CHECK(P(1, 1) == 1);
}

TEST_CASE("identity pseudo-gradient returns its argument") {
  const GameSpec g = isotropic_game(1.0, 3);
  const Vector a = vec({0.3, -1.2, 4.0});
  CHECK((pseudo_gradient(g, a) - a).norm() == 0.0);
}

TEST_CASE("pseudo-gradient matches finite differences of each player's cost") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const BlockLayout& layout = g.layout();
    Vector a = Vector::LinSpaced(g.dim(), -1.0, 1.5);
    const Vector m = pseudo_gradient(g, a);
    for (int i = 0; i < g.num_players(); ++i) {
      auto f = [&](const Vector& x) { return evaluate_cost(g, i, x); };
      const Vector fd = ref::central_difference(f, a);
      const Vector mine = m.segment(layout.offset(i), layout.dim(i));
      const Vector theirs = fd.segment(layout.offset(i), layout.dim(i));
      CHECK((mine - theirs).norm() <= 1e-6 * std::max(1.0, theirs.norm()));
    }
  }
}

TEST_CASE("black-box pseudo-gradient uses finite differences") {
  const GameSpec smooth = softplus_coupled_example();
  CHECK_FALSE(smooth.quadratic());
  const Vector a = vec({0.2, -0.1});
  const Vector analytic = pseudo_gradient(smooth, a);
  GameSpec black_box(smooth.layout(), smooth.costs(), smooth.constraints());
  const Vector fd = pseudo_gradient(black_box, a);
  CHECK((analytic - fd).norm() <= 1e-6 * std::max(1.0, analytic.norm()));
}

TEST_CASE("quadratic pseudo-gradient is P a + q exactly and strongly monotone") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const QuadraticGame& q = *g.quadratic();
    const double nu = monotonicity_constant(g);
    for (int trial = 0; trial < 1000; ++trial) {
      Vector a1(g.dim()), a2(g.dim());
      for (Eigen::Index k = 0; k < a1.size(); ++k) {
        a1(k) = 2 * nd(rng);
        a2(k) = 2 * nd(rng);
      }
      CHECK((pseudo_gradient(g, a1) - (q.P() * a1 + q.q())).norm() == 0.0);
      const double lhs = (pseudo_gradient(g, a1) - pseudo_gradient(g, a2)).dot(a1 - a2);
      CHECK(lhs >= nu * (a1 - a2).squaredNorm() - 1e-10);
    }
  }
}

TEST_CASE("constraint values") {
  const GameSpec g = paper_example();
  CHECK(constraint_value(g.constraints(), vec({0, 1}))(0) == 0.0);
  CHECK(constraint_value(g.constraints(), vec({1, 1}))(0) == -1.0);
  CHECK(constraint_value(g.constraints(), vec({0.25, 0.75}))(0) == 0.0);
}

TEST_CASE("constraint values are affine") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = random_quadratic(seed);
    for (int trial = 0; trial < 50; ++trial) {
      Vector a1(g.dim()), a2(g.dim());
      for (Eigen::Index k = 0; k < a1.size(); ++k) {
        a1(k) = nd(rng);
        a2(k) = nd(rng);
      }
      const double alpha = ud(rng);
      const Vector lhs = constraint_value(g.constraints(), alpha * a1 + (1 - alpha) * a2);
      const Vector rhs = alpha * constraint_value(g.constraints(), a1) +
                         (1 - alpha) * constraint_value(g.constraints(), a2);
      CHECK((lhs - rhs).norm() <= 1e-12);
    }
  }
}

TEST_CASE("Slater check") {
  SUBCASE("paper-example game is strictly feasible") {
    const SlaterResult r = check_slater(paper_example().constraints().K(), paper_example().constraints().l());
    CHECK(r.strictly_feasible);
    CHECK(r.best_max_violation < 0.0);
  }
  SUBCASE("contradictory halfspaces are rejected") {
    Matrix K(2, 1);
    K << 1, -1;
    CHECK_THROWS_AS(ConstraintSet(K, vec({-1, -1})), InfeasibleError);
  }
  SUBCASE("a set with empty interior is rejected") {
    Matrix K(2, 1);
    K << 1, -1;
    CHECK_THROWS_AS(ConstraintSet(K, vec({0, 0})), InfeasibleError);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(ConstraintSet(Matrix::Ones(2, 2), vec({1})), DimensionError);
  }
  SUBCASE("random games are strictly feasible") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ConstraintSet& cs = random_quadratic(seed).constraints();
      const SlaterResult r = check_slater(cs.K(), cs.l());
      CHECK(r.strictly_feasible);
      CHECK(constraint_value(cs, r.point).maxCoeff() < 0.0);
    }
  }
}

TEST_CASE("monotonicity and Lipschitz constants of paper-example game") {
  const GameSpec g = paper_example();
  CHECK(monotonicity_constant(g) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix P(2, 2);
  P << 3, 1, -1, 1;
  const double smax = Eigen::JacobiSVD<Matrix>(P).singularValues()(0);
  CHECK(lipschitz_constant(g) == doctest::Approx(smax).epsilon(1e-12));

  const ProbeResult nu_hat = probe_monotonicity(g, 10000, 2.0, 1);
  CHECK_FALSE(nu_hat.flagged);
  CHECK(nu_hat.estimate == doctest::Approx(1.0).epsilon(0.1));
  CHECK(nu_hat.estimate >= 1.0 - 1e-12);
  const ProbeResult l_hat = probe_lipschitz(g, 10000, 2.0, 1);
  CHECK(l_hat.estimate == doctest::Approx(smax).epsilon(0.1));
  CHECK(l_hat.estimate <= smax + 1e-12);
}

TEST_CASE("probes on an isotropic game") {
  const GameSpec g = isotropic_game(2.0, 3);
  CHECK(probe_monotonicity(g, 100, 1.0, 3).estimate == doctest::Approx(2.0));
  CHECK(probe_lipschitz(g, 100, 1.0, 3).estimate == doctest::Approx(2.0));
}

TEST_CASE("probe agrees with eigenvalue-exact constant on random games") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GameSpec g = random_quadratic(seed);
    const ProbeResult r = probe_monotonicity(g, 10000, 2.0, seed);
    CHECK(r.estimate == doctest::Approx(g.quadratic()->strong_monotonicity()).epsilon(0.1));
  }
}

TEST_CASE("non-monotone game is flagged") {
  Matrix P(2, 2);
  P << 1, 0, 0, -1;
  GameSpec g(QuadraticGame::from_pseudo_gradient(BlockLayout({1, 1}), P, Vector::Zero(2)), ConstraintSet::none(2));
  CHECK(g.quadratic()->strong_monotonicity() < 0);
  const ProbeResult r = probe_monotonicity(g, 1000, 1.0, 2);
  CHECK(r.flagged);
  CHECK(r.estimate <= 0.0);
}

TEST_CASE("degenerate probe pairs are skipped") {
  const GameSpec g = paper_example();
  std::vector<std::pair<Vector, Vector>> pairs = {{vec({1, 1}), vec({1, 1})}, {vec({0, 0}), vec({1, 0})}};
  const ProbeResult r = probe_lipschitz_pairs(g, pairs);
  CHECK(r.pairs_used == 1);
  CHECK(r.estimate == doctest::Approx(std::sqrt(10.0)));
  CHECK_THROWS_AS(probe_lipschitz_pairs(g, {pairs[0]}), Error);
}

TEST_CASE("known constants override computed ones") {
  GameSpec g = paper_example();
  g.with_known_nu(0.5).with_known_lipschitz(7.0);
  CHECK(monotonicity_constant(g) == 0.5);
  CHECK(lipschitz_constant(g) == 7.0);
}

TEST_CASE("softplus-coupled family keeps the quadratic's monotonicity") {
  const GameSpec g = softplus_coupled_example();
  const ProbeResult r = probe_monotonicity(g, 2000, 2.0, 9);
  CHECK_FALSE(r.flagged);
  CHECK(r.estimate >= monotonicity_constant(g) - 1e-6);
  CHECK(probe_lipschitz(g, 2000, 2.0, 9).estimate <= lipschitz_constant(g) + 1e-6);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("builtin registry") {
  for (const auto& name : builtin_names()) CHECK_NOTHROW(make_builtin(name, 1));
  CHECK_THROWS_AS(make_builtin("no-such-game"), ConfigError);
  CHECK(make_builtin("random-quadratic", 4).name() == "random-quadratic-4");
  const GameSpec a = random_quadratic(4), b = random_quadratic(4);
  CHECK(a.quadratic()->P() == b.quadratic()->P());
  CHECK(a.constraints().K() == b.constraints().K());
}

TEST_CASE("random games respect the size limits") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const GameSpec g = random_quadratic(seed);
    CHECK(g.dim() <= 6);
    CHECK(g.num_constraints() >= 1);
    CHECK(g.num_constraints() <= 3);
    CHECK(g.quadratic()->strong_monotonicity() >= 0.5 - 1e-12);
  }
}

TEST_CASE("game definition files") {
  SUBCASE("explicit definition reproduces the builtin") {
    const GameSpec g = parse_game(R"({
      // two scalar players
      "players": 2, "dims": [1, 1],
      "A": [ [[3, 1], [1, 0]], [[0, -1], [-1, 1]] ],
      "K": [[-1, -1]], "l": [-1]
    })");
    const GameSpec b = paper_example();
    CHECK((g.quadratic()->P() - b.quadratic()->P()).norm() == 0.0);
    CHECK((g.quadratic()->q() - b.quadratic()->q()).norm() == 0.0);
    CHECK(g.constraints().K() == b.constraints().K());
    CHECK(g.name() == "custom");
  }
  SUBCASE("builtin reference") {
    CHECK(parse_game(R"({"builtin": "random-quadratic", "seed": 3})").name() == "random-quadratic-3");
  }
  SUBCASE("unconstrained with linear terms and known constants") {
    const GameSpec g = parse_game(R"({"name": "iso", "dims": [2],
      "A": [[[2, 0], [0, 2]]], "b": [[1, -1]], "nu": 2, "lipschitz": 2})");
    CHECK(g.num_constraints() == 0);
    CHECK(g.known_nu().value() == 2.0);
    CHECK(pseudo_gradient(g, vec({0, 0}))(0) == 1.0);
  }
  SUBCASE("malformed inputs") {
    CHECK_THROWS_AS(parse_game("{"), ConfigError);
    CHECK_THROWS_AS(parse_game("[]"), ConfigError);
    CHECK_THROWS_AS(parse_game(R"({"dims": [1, 1]})"), ConfigError);
    CHECK_THROWS_AS(parse_game(R"({"players": 3, "dims": [1, 1], "A": []})"), DimensionError);
    CHECK_THROWS_AS(parse_game(R"({"dims": [1], "A": [[[1, 2]]]})"), DimensionError);
    CHECK_THROWS_AS(parse_game(R"({"dims": [1], "A": [[[1]]], "K": [[1]]})"), ConfigError);
    CHECK_THROWS_AS(parse_game(R"({"dims": [1], "A": [[["x"]]]})"), ConfigError);
    CHECK_THROWS_AS(parse_game(R"({"dims": [1], "A": [[[1]]], "K": [[1], [-1]], "l": [-1, -1]})"), InfeasibleError);
    CHECK_THROWS_AS(load_game("/nonexistent/game.json"), ConfigError);
  }
}
