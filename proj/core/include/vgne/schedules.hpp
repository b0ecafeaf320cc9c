#pragma once

#include <string>
#include <vector>

namespace vgne {

/// Power-law parameter families
///   step size       gamma_t = G / t^g
///   regularization  eps_t   = E / t^e
///   sampling radius sigma_t = S / t^s
/// Iterations are indexed from t = 1.
struct Schedules {
  double G = 1.0;
  double g = 4.0 / 7.0;
  double E = 1.0;
  double e = 2.0 / 7.0;
  double S = 1.0;
  double s = 4.0 / 7.0;

  double gamma(long t) const;
  double epsilon(long t) const;
  double sigma(long t) const;

  /// g = 4/7, e = 2/7 with the given sampling exponent (s >= 4/7 for the 4/7 rate).
  static Schedules rate_optimal(double sampling_exponent = 4.0 / 7.0);
};

/// Convergence conditions s + g > 1, g + e < 1, g > 1/2 on the exponents, the
/// auxiliary exponent h = min{2 - g - e, g + s, 2g} and the predicted decay
/// exponent min{2e, h - g} of E||mu(t) - a*||^2.
struct ScheduleReport {
  bool positive = false;        ///< all of G, E, S, g, e, s > 0
  bool s_plus_g_gt_one = false;
  bool g_plus_e_lt_one = false;
  bool g_gt_half = false;
  double h = 0.0;
  double predicted_exponent = 0.0;

  bool valid() const { return positive && s_plus_g_gt_one && g_plus_e_lt_one && g_gt_half; }
  /// Human-readable list of failed conditions (empty when valid).
  std::vector<std::string> failures() const;
};

/// Strict inequalities are evaluated with a 1e-12 margin so that boundary
/// cases such as g + e = 1 computed in floating point count as violations.
ScheduleReport validate_schedules(const Schedules& sched);

}  // namespace vgne
