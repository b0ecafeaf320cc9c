#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vgne/augmented.hpp"
#include "vgne/game.hpp"
#include "vgne/schedules.hpp"

namespace vgne {

/// Iterate of the payoff-based learner. The Gaussian means mu and the dual
/// vector lambda are the only learned quantities; t starts at 1.
struct LearnerState {
  JointAction mu;
  Vector lambda;
  long t = 1;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  /// mu = 0, lambda = 0 unless overridden. lambda0 must be nonnegative.
  static LearnerState initial(const BlockLayout& layout, int num_constraints, std::uint64_t seed,
                              std::optional<Vector> mu0 = std::nullopt,
                              std::optional<Vector> lambda0 = std::nullopt);
};

/// Values revealed to the players after a round: U^i at the played action and at
/// the mean (two queries), plus the constraint value at the played action.
struct Feedback {
  Vector u_at_a;   ///< U^i(a(t), lambda(t)), one per player
  Vector u_at_mu;  ///< U^i(mu(t), lambda(t))
  Vector g_at_a;   ///< K a(t) - l
};

/// The payoff-only window onto a game: cost and constraint values, never gradients.
class PayoffOracle {
 public:
  explicit PayoffOracle(const GameSpec& game) : game_(&game) {}

  /// U^i(a, lambda) for every player.
  Vector augmented_costs(const Vector& a, const Vector& lambda) const;
  Vector constraint_values(const Vector& a) const;
  Feedback query(const JointAction& played, const JointAction& mean, const Vector& lambda) const;

  const BlockLayout& layout() const { return game_->layout(); }
  int num_constraints() const { return game_->num_constraints(); }

 private:
  const GameSpec* game_;
};

/// Draws a^i ~ N(mu^i, sigma^2 I) for every player, consuming the state's stream.
/// Throws for sigma <= 0.
JointAction sample_action(LearnerState& state, double sigma);

/// m = (u_at_a - u_at_mu) (a_i - mu_i) / sigma^2.
Vector two_point_estimate(double u_at_a, double u_at_mu, const Eigen::Ref<const Vector>& a_i,
                          const Eigen::Ref<const Vector>& mu_i, double sigma);

/// In-place update with the schedule values at state.t:
///   mu^i   <- mu^i - gamma_t m^i
///   lambda <- Proj_{>=0}[lambda - gamma_t(-g(a(t)) + eps_t lambda)]
/// then t <- t + 1.
void advance(LearnerState& state, const JointAction& played, const Feedback& feedback, const Schedules& sched);

/// Value-returning form of advance().
LearnerState step(const LearnerState& state, const JointAction& played, const Feedback& feedback,
                  const Schedules& sched);

struct RunOptions {
  /// Record every k-th update; 0 selects ~20 log-spaced checkpoints per decade.
  /// The last update is always recorded.
  long record_every = 0;
  bool allow_invalid_schedules = false;
  std::optional<Vector> mu0;
  std::optional<Vector> lambda0;
  /// Error reference (a*, lambda*). Computed with reference_equilibrium() when absent.
  std::optional<AugmentedPoint> reference;
  /// Std-dev of additive Gaussian noise on revealed cost values. Off by default.
  double observation_noise = 0.0;
};

/// One checkpoint after `t` completed updates; gamma/eps/sigma are the values
/// used in update t.
struct TrajectoryRecord {
  long t = 0;
  double err_primal_sq = 0.0;  ///< ||mu - a*||^2
  double err_dual_sq = 0.0;    ///< ||lambda - lambda*||^2
  double gamma = 0.0;
  double eps = 0.0;
  double sigma = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<TrajectoryRecord> records;
  LearnerState final_state;
};

/// Update counts at which run() records for the given cadence.
std::vector<long> checkpoints(long T, long record_every);

/// T rounds of sample / query / update. The loop sees the game only through a
/// PayoffOracle. Throws ScheduleError when the schedules violate the
/// convergence conditions unless allow_invalid_schedules is set.
RunResult run(const GameSpec& game, const Schedules& sched, long T, std::uint64_t seed,
              const RunOptions& opts = {});

}  // namespace vgne
