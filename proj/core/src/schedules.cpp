#include "vgne/schedules.hpp"

#include <algorithm>
#include <cmath>

namespace vgne {

namespace {
constexpr double kMargin = 1e-12;
}

double Schedules::gamma(long t) const { return G / std::pow(static_cast<double>(t), g); }
double Schedules::epsilon(long t) const { return E / std::pow(static_cast<double>(t), e); }
double Schedules::sigma(long t) const { return S / std::pow(static_cast<double>(t), s); }

Schedules Schedules::rate_optimal(double sampling_exponent) {
  Schedules sched;
  sched.s = sampling_exponent;
  return sched;
}

ScheduleReport validate_schedules(const Schedules& sched) {
  ScheduleReport r;
  r.positive = sched.G > 0 && sched.E > 0 && sched.S > 0 && sched.g > 0 && sched.e > 0 && sched.s > 0;
  r.s_plus_g_gt_one = sched.s + sched.g > 1.0 + kMargin;
  r.g_plus_e_lt_one = sched.g + sched.e < 1.0 - kMargin;
  r.g_gt_half = sched.g > 0.5 + kMargin;
  r.h = std::min({2.0 - sched.g - sched.e, sched.g + sched.s, 2.0 * sched.g});
  r.predicted_exponent = std::min(2.0 * sched.e, r.h - sched.g);
  return r;
}

std::vector<std::string> ScheduleReport::failures() const {
  std::vector<std::string> out;
  if (!positive) out.emplace_back("all schedule constants and exponents must be positive");
  if (!s_plus_g_gt_one) out.emplace_back("s + g > 1 fails");
  if (!g_plus_e_lt_one) out.emplace_back("g + e < 1 fails");
  if (!g_gt_half) out.emplace_back("g > 1/2 fails");
  return out;
}

}  // namespace vgne
