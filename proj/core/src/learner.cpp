#include "vgne/learner.hpp"

#include <algorithm>
#include <cmath>

#include "vgne/error.hpp"
#include "vgne/oracles.hpp"

namespace vgne {

LearnerState LearnerState::initial(const BlockLayout& layout, int num_constraints, std::uint64_t seed,
                                   std::optional<Vector> mu0, std::optional<Vector> lambda0) {
  Vector mu = mu0 ? *mu0 : Vector::Zero(layout.total_dim());
  Vector lambda = lambda0 ? *lambda0 : Vector::Zero(num_constraints);
  if (lambda.size() != num_constraints) throw DimensionError("initial dual vector", num_constraints, lambda.size());
  if (num_constraints > 0 && lambda.minCoeff() < 0.0) throw Error("initial dual vector must be nonnegative");
  return LearnerState{JointAction(layout, std::move(mu)), std::move(lambda), 1, std::mt19937_64(seed), {}};
}

Vector PayoffOracle::augmented_costs(const Vector& a, const Vector& lambda) const {
  const double penalty = lambda.dot(constraint_value(game_->constraints(), a));
  Vector u(game_->num_players());
  for (int i = 0; i < game_->num_players(); ++i) u(i) = evaluate_cost(*game_, i, a) + penalty;
  return u;
}

Vector PayoffOracle::constraint_values(const Vector& a) const { return constraint_value(game_->constraints(), a); }

Feedback PayoffOracle::query(const JointAction& played, const JointAction& mean, const Vector& lambda) const {
  return Feedback{augmented_costs(played.flat(), lambda), augmented_costs(mean.flat(), lambda),
                  constraint_values(played.flat())};
}

JointAction sample_action(LearnerState& state, double sigma) {
  if (!(sigma > 0.0)) throw Error("sampling radius sigma must be positive");
  JointAction a = state.mu;
  Vector& flat = a.flat();
  for (Eigen::Index k = 0; k < flat.size(); ++k) flat(k) += sigma * state.normal(state.rng);
  return a;
}

Vector two_point_estimate(double u_at_a, double u_at_mu, const Eigen::Ref<const Vector>& a_i,
                          const Eigen::Ref<const Vector>& mu_i, double sigma) {
  if (!(sigma > 0.0)) throw Error("sampling radius sigma must be positive");
  if (a_i.size() != mu_i.size()) throw DimensionError("two_point_estimate mean", a_i.size(), mu_i.size());
  return ((u_at_a - u_at_mu) / (sigma * sigma)) * (a_i - mu_i);
}

void advance(LearnerState& state, const JointAction& played, const Feedback& feedback, const Schedules& sched) {
  const BlockLayout& layout = state.mu.layout();
  const int N = layout.num_players();
  if (feedback.u_at_a.size() != N) throw DimensionError("feedback u_at_a", N, feedback.u_at_a.size());
  if (feedback.u_at_mu.size() != N) throw DimensionError("feedback u_at_mu", N, feedback.u_at_mu.size());
  if (feedback.g_at_a.size() != state.lambda.size())
    throw DimensionError("feedback g_at_a", state.lambda.size(), feedback.g_at_a.size());
  if (played.flat().size() != layout.total_dim())
    throw DimensionError("played action", layout.total_dim(), played.flat().size());

  const double gamma = sched.gamma(state.t);
  const double eps = sched.epsilon(state.t);
  const double sigma = sched.sigma(state.t);
  for (int i = 0; i < N; ++i) {
    const Vector m = two_point_estimate(feedback.u_at_a(i), feedback.u_at_mu(i), played.block(i), state.mu.block(i), sigma);
    state.mu.block(i) -= gamma * m;
  }
  state.lambda = (state.lambda - gamma * (-feedback.g_at_a + eps * state.lambda)).cwiseMax(0.0);
  ++state.t;
}

LearnerState step(const LearnerState& state, const JointAction& played, const Feedback& feedback,
                  const Schedules& sched) {
  LearnerState next = state;
  advance(next, played, feedback, sched);
  return next;
}

std::vector<long> checkpoints(long T, long record_every) {
  if (T < 1) throw Error("run length T must be at least 1");
  if (record_every < 0) throw Error("record cadence must be nonnegative");
  std::vector<long> out;
  if (record_every > 0) {
    for (long t = record_every; t <= T; t += record_every) out.push_back(t);
  } else {
    constexpr int kPerDecade = 20;
    for (int j = 0;; ++j) {
      const long t = std::lround(std::pow(10.0, static_cast<double>(j) / kPerDecade));
      if (t > T) break;
      if (out.empty() || out.back() != t) out.push_back(t);
    }
  }
  if (out.empty() || out.back() != T) out.push_back(T);
  return out;
}

RunResult run(const GameSpec& game, const Schedules& sched, long T, std::uint64_t seed, const RunOptions& opts) {
  if (T < 1) throw Error("run length T must be at least 1");
  const ScheduleReport report = validate_schedules(sched);
  if (!report.valid() && !opts.allow_invalid_schedules) {
    std::string msg = "schedules violate the convergence conditions:";
    for (const auto& f : report.failures()) msg += " " + f + ";";
    throw ScheduleError(msg);
  }
  const AugmentedPoint reference = opts.reference ? *opts.reference : reference_equilibrium(game);

  const PayoffOracle oracle(game);
  RunResult result{seed, {},
                   LearnerState::initial(game.layout(), game.num_constraints(), seed, opts.mu0, opts.lambda0)};
  LearnerState& state = result.final_state;

  // Observation noise has its own stream so that enabling it does not shift the samples.
  std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::vector<long> marks = checkpoints(T, opts.record_every);
  result.records.reserve(marks.size());
  auto next_mark = marks.begin();
  for (long k = 1; k <= T; ++k) {
    const long t = state.t;
    const double sigma = sched.sigma(t);
    const JointAction played = sample_action(state, sigma);
    Feedback fb = oracle.query(played, state.mu, state.lambda);
    if (opts.observation_noise > 0.0) {
      for (Eigen::Index i = 0; i < fb.u_at_a.size(); ++i) fb.u_at_a(i) += opts.observation_noise * noise(noise_rng);
      for (Eigen::Index i = 0; i < fb.u_at_mu.size(); ++i) fb.u_at_mu(i) += opts.observation_noise * noise(noise_rng);
    }
    advance(state, played, fb, sched);
    if (next_mark != marks.end() && *next_mark == k) {
      result.records.push_back(TrajectoryRecord{k, (state.mu.flat() - reference.primal.flat()).squaredNorm(),
                                                (state.lambda - reference.dual).squaredNorm(), sched.gamma(t),
                                                sched.epsilon(t), sigma});
      ++next_mark;
    }
  }
  return result;
}

}  // namespace vgne
