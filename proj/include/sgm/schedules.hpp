#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sgm {

enum class ScheduleFamily { Power, Constant };

enum class RegimeTag { StronglyConvexRegime, NonConvexRegime, LastIterateRegime, Custom };

inline const char* to_string(RegimeTag r) {
  switch (r) {
    case RegimeTag::StronglyConvexRegime: return "strongly_convex";
    case RegimeTag::NonConvexRegime: return "non_convex";
    case RegimeTag::LastIterateRegime: return "last_iterate";
    case RegimeTag::Custom: return "custom";
  }
  return "?";
}

/// Step-size family alpha_t = scale / t^exponent (or constant). Immutable
/// value object. A scale of 0 on a regime-tagged schedule means "let the
/// runner pick the largest scale admitted by the problem/oracle constants".
struct Schedule {
  ScheduleFamily family = ScheduleFamily::Power;
  double scale = 1.0;
  double exponent = 0.0;  // Power only; within [0, 1.5]
  RegimeTag regime = RegimeTag::Custom;
  double regime_param = 0.0;  // theta or epsilon for regime-tagged schedules

  static Schedule power(double scale, double exponent) {
    if (scale <= 0.0) throw std::invalid_argument("power schedule: scale must be positive");
    if (exponent < 0.0 || exponent > 1.5)
      throw std::invalid_argument("power schedule: exponent must be in [0, 1.5]");
    return Schedule{ScheduleFamily::Power, scale, exponent, RegimeTag::Custom, 0.0};
  }

  static Schedule constant(double scale) {
    if (scale <= 0.0) throw std::invalid_argument("constant schedule: scale must be positive");
    return Schedule{ScheduleFamily::Constant, scale, 0.0, RegimeTag::Custom, 0.0};
  }

  /// alpha_t = scale / t^{1-theta}, theta in (0, 1/2). scale <= 0 requests
  /// auto-scaling by the runner.
  static Schedule strongly_convex_regime(double theta, double scale = 0.0) {
    if (!(theta > 0.0 && theta < 0.5))
      throw std::invalid_argument("strongly_convex_regime: theta must be in (0, 1/2)");
    return Schedule{ScheduleFamily::Power, scale, 1.0 - theta,
                    RegimeTag::StronglyConvexRegime, theta};
  }

  /// alpha_t = scale / t^{1/2+epsilon}, epsilon in (0, 1/2).
  static Schedule non_convex_regime(double epsilon, double scale = 0.0) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
      throw std::invalid_argument("non_convex_regime: epsilon must be in (0, 1/2)");
    return Schedule{ScheduleFamily::Power, scale, 0.5 + epsilon, RegimeTag::NonConvexRegime,
                    epsilon};
  }

  /// alpha_t = scale / t^{2/3+epsilon}, epsilon in (0, 1/3).
  static Schedule last_iterate_regime(double epsilon, double scale = 0.0) {
    if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0))
      throw std::invalid_argument("last_iterate_regime: epsilon must be in (0, 1/3)");
    return Schedule{ScheduleFamily::Power, scale, 2.0 / 3.0 + epsilon,
                    RegimeTag::LastIterateRegime, epsilon};
  }

  Schedule with_scale(double s) const {
    Schedule copy = *this;
    copy.scale = s;
    return copy;
  }
};

inline double step_size(const Schedule& s, std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("step_size: t must be >= 1");
  if (s.family == ScheduleFamily::Constant) return s.scale;
  return s.scale / std::pow(static_cast<double>(t), s.exponent);
}

/// Sum_{i=1..t} alpha_i by plain accumulation; partial_sum(s, 0) = 0.
inline double partial_sum(const Schedule& s, std::uint64_t t) {
  if (s.family == ScheduleFamily::Constant) return static_cast<double>(t) * s.scale;
  double acc = 0.0;
  for (std::uint64_t i = 1; i <= t; ++i) acc += step_size(s, i);
  return acc;
}

struct RobbinsMonroClass {
  bool diverging_sum = false;   // sum alpha_t = infinity
  bool square_summable = false; // sum alpha_t^2 < infinity
};

inline RobbinsMonroClass robbins_monro_classify(const Schedule& s) {
  if (s.family == ScheduleFamily::Constant) return {true, false};
  const double p = s.exponent;
  return {p <= 1.0, 2.0 * p > 1.0};
}

}  // namespace sgm
