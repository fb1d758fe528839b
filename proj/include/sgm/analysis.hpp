#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgm/schedules.hpp"

namespace sgm {

/// Per-trajectory metrics on a log-spaced sampling grid.
/// f_gap and z_gap are clipped below at 1e-300 so later log-fits stay finite.
struct TrajectoryRecord {
  std::vector<std::uint64_t> sample_grid;
  std::vector<double> f_gap;
  std::vector<double> grad_norm_sq;
  std::vector<double> v_norm_sq;   // momentum methods; zeros for SGD
  std::vector<double> z_gap;       // f(z_t) - f*
  std::vector<double> grad_min;    // exact online running min of ||grad f||^2
  std::vector<double> y_weighted;  // exact online decreasing-step weighted average
  std::vector<Eigen::VectorXd> iterates;  // optional, only when requested
  std::uint64_t seed_index = 0;
  bool diverged = false;
  std::string config_digest;
};

constexpr double kGapClip = 1e-300;

/// Log-spaced integer grid on [1, horizon] with both endpoints included,
/// strictly increasing, at most `points` entries.
inline std::vector<std::uint64_t> log_grid(std::uint64_t horizon, std::size_t points = 200) {
  if (horizon == 0) throw std::invalid_argument("log_grid: horizon must be >= 1");
  std::vector<std::uint64_t> g;
  g.reserve(points);
  const double lh = std::log10(static_cast<double>(horizon));
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < points; ++i) {
    double f = points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    auto t = static_cast<std::uint64_t>(std::llround(std::pow(10.0, f * lh)));
    t = std::max<std::uint64_t>(1, std::min(t, horizon));
    if (t > prev) {
      g.push_back(t);
      prev = t;
    }
  }
  if (g.front() != 1) g.insert(g.begin(), 1);
  if (g.back() != horizon) g.push_back(horizon);
  return g;
}

/// The weighted-average recursion Y_{t+1} = (1-w_t) Y_t + w_t X_t with
/// w_t = 2 alpha_t / sum_{i<=t} alpha_i, Y_1 = X_1 (w_1 = 2 gives Y_2 = X_1).
/// Returned series has Y_t at index t-1.
inline std::vector<double> weighted_average_sequence(const std::vector<double>& x,
                                                     const Schedule& schedule) {
  std::vector<double> y;
  y.reserve(x.size());
  double yt = 0.0, sum_alpha = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::invalid_argument("weighted_average_sequence: negative entry");
    const std::uint64_t t = i + 1;
    const double alpha = step_size(schedule, t);
    sum_alpha += alpha;
    if (t == 1) {
      yt = x[i];
    } else {
      const double w = 2.0 * alpha / sum_alpha;
      yt = (1.0 - w) * yt + w * x[i];
    }
    y.push_back(yt);
  }
  return y;
}

/// Streaming form of the recursion above, for per-step use inside runners.
class WeightedAverageAccumulator {
 public:
  /// Feed X_t with its step size; returns Y_{t+1} (the value after absorbing X_t).
  double update(double x_t, double alpha_t) {
    if (x_t < 0.0) throw std::invalid_argument("weighted average: negative entry");
    sum_alpha_ += alpha_t;
    if (t_ == 1) {
      y_ = x_t;
    } else {
      const double w = 2.0 * alpha_t / sum_alpha_;
      y_ = (1.0 - w) * y_ + w * x_t;
    }
    ++t_;
    return y_;
  }

  /// Y_t: the weighted average of X_1..X_{t-1} (equals X_1 until two updates).
  double current() const { return y_; }
  bool started() const { return t_ > 1; }

 private:
  double y_ = 0.0;
  double sum_alpha_ = 0.0;
  std::uint64_t t_ = 1;
};

inline std::vector<double> running_min(const std::vector<double>& x) {
  std::vector<double> m;
  m.reserve(x.size());
  double cur = std::numeric_limits<double>::infinity();
  for (double v : x) {
    cur = std::min(cur, v);
    m.push_back(cur);
  }
  return m;
}

/// Fitted power law value ~ c t^{-exponent} with OLS on (log t, log value).
struct RateFit {
  double exponent = 0.0;
  double log_intercept = 0.0;
  double r_squared = 0.0;
  std::uint64_t window_lo = 0;
  std::uint64_t window_hi = 0;
  std::size_t n_points = 0;
  bool floor_clipped = false;  // some tail points were at the numerical floor
};

/// OLS fit of log(value) on log(t) over the last `window_fraction` of the
/// log-t range. Points with value <= 0 or below 1e-14 x the first series
/// value (numerical floor) are excluded. An all-excluded tail with zeros
/// present yields an infinite-exponent sentinel.
inline RateFit fit_rate(const std::vector<std::uint64_t>& grid, const std::vector<double>& values,
                        double window_fraction = 0.5) {
  if (grid.size() != values.size())
    throw std::invalid_argument("fit_rate: grid/value size mismatch");
  if (grid.empty()) throw std::invalid_argument("fit_rate: empty series");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("fit_rate: window_fraction must be in (0, 1]");

  const double log_hi = std::log(static_cast<double>(grid.back()));
  const double log_lo = (1.0 - window_fraction) * log_hi;
  const double floor = 1e-14 * std::max(values.front(), 0.0);

  RateFit fit;
  fit.window_lo = std::numeric_limits<std::uint64_t>::max();
  std::vector<double> xs, ys;
  bool clipped = false, any_nonpositive_tail = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lt = std::log(static_cast<double>(grid[i]));
    if (lt < log_lo) continue;
    if (values[i] <= 0.0) {
      any_nonpositive_tail = true;
      continue;
    }
    if (values[i] < floor) {
      clipped = true;
      continue;
    }
    xs.push_back(lt);
    ys.push_back(std::log(values[i]));
    fit.window_lo = std::min(fit.window_lo, grid[i]);
    fit.window_hi = std::max(fit.window_hi, grid[i]);
  }
  fit.floor_clipped = clipped;
  fit.n_points = xs.size();
  if (xs.size() < 3) {
    if (xs.empty() && (clipped || any_nonpositive_tail)) {
      fit.exponent = std::numeric_limits<double>::infinity();
      fit.window_lo = 0;
      return fit;  // converged-to-floor sentinel
    }
    throw std::runtime_error("fit_rate: insufficient tail (fewer than 3 usable points)");
  }

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::runtime_error("fit_rate: degenerate window");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  fit.exponent = -slope;
  fit.log_intercept = intercept;
  double ss_res = 0.0;
  const double ybar = sy / n;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (slope * xs[i] + intercept);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
  return fit;
}

/// Order statistics of per-seed exponents; the q-quantile (nearest rank)
/// is the headline trajectory-wise rate estimate.
struct AggregateReport {
  std::vector<double> exponents_sorted;
  double quantile = 0.0;
  double quantile_exponent = 0.0;

  double fraction_above(double threshold) const {
    if (exponents_sorted.empty()) return 0.0;
    auto it = std::upper_bound(exponents_sorted.begin(), exponents_sorted.end(), threshold);
    return static_cast<double>(exponents_sorted.end() - it) /
           static_cast<double>(exponents_sorted.size());
  }

  double min_exponent() const { return exponents_sorted.front(); }
};

inline AggregateReport almost_sure_aggregate(const std::vector<RateFit>& fits, double quantile) {
  if (fits.empty()) throw std::invalid_argument("almost_sure_aggregate: empty input");
  if (fits.size() < 10)
    throw std::invalid_argument("almost_sure_aggregate: need at least 10 fits");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("almost_sure_aggregate: quantile must be in (0, 1)");
  AggregateReport r;
  r.quantile = quantile;
  r.exponents_sorted.reserve(fits.size());
  for (const auto& f : fits) r.exponents_sorted.push_back(f.exponent);
  std::sort(r.exponents_sorted.begin(), r.exponents_sorted.end());
  // nearest-rank: k = ceil(q n), 1-based
  const auto n = static_cast<double>(r.exponents_sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(quantile * n));
  k = std::max<std::size_t>(1, std::min<std::size_t>(k, r.exponents_sorted.size()));
  r.quantile_exponent = r.exponents_sorted[k - 1];
  return r;
}

}  // namespace sgm
