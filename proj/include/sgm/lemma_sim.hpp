#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sgm/analysis.hpp"
#include "sgm/random.hpp"

namespace sgm {

/// Strong-case recursion E[Y_{t+1}|F_t] = (1 - c1 alpha_t) Y_t + c2 alpha_t^2
/// with alpha_t = alpha_scale / t^{1-theta}.
struct StrongCaseSpec {
  double c1 = 1.0;
  double c2 = 1.0;
  double theta = 0.1;     // in (0, 1/2)
  double epsilon = 0.25;  // scaled series exponent 1-epsilon; guarantee for epsilon > 2 theta
  double alpha_scale = 0.0;  // <= 0: auto-scale so c1 alpha_1 = 1/2
};

/// Robbins-Siegmund recursion Y_{t+1} = (1+gamma_t) Y_t - X_t + Z_t with
/// gamma_t = gamma_scale / t^{gamma_power}, Z_t = z_scale / t^{z_power},
/// X_t = min(x_fraction Y_t, x_cap_scale / (t ln^2(t+1))) (cap disabled when
/// x_cap_scale <= 0). X never exceeds Y plus the inflow, so Y stays nonnegative.
struct RobbinsSiegmundSpec {
  double gamma_scale = 1.0;
  double gamma_power = 2.0;  // > 1 required unless gamma_scale == 0
  double z_scale = 1.0;
  double z_power = 1.5;  // > 1 required unless z_scale == 0
  double x_fraction = 1.0;
  double x_cap_scale = 1.0;
  double y1 = 0.5;
};

/// General-convex-case recursion
/// E[Y_{t+1}|F_t] = (1 + c1 alpha_t^2) Y_t + c2 alpha_t^2 with
/// alpha_t = alpha_scale / t^{2/3+epsilon}, plus a multiplicative damping
/// (1 - kappa alpha_t Y_t/(1+Y_t)) enforcing the hypothesis sum alpha_t Y_t < inf.
struct ConvexCaseSpec {
  double c1 = 1.0;
  double c2 = 1.0;
  double epsilon = 0.1;      // in (0, 1/3)
  double alpha_scale = 0.0;  // <= 0: auto-scale so c1 alpha_1 = 1/2
  double kappa = 1.0;        // 0 disables damping (the hypothesis then fails)
};

struct RecursionSpec {
  std::variant<StrongCaseSpec, RobbinsSiegmundSpec, ConvexCaseSpec> kind;
  std::uint64_t horizon = 100000;
  double noise_amplitude = 0.0;  // multiplicative (1 + a U), U ~ Uniform[-1,1]

  void validate() const {
    if (horizon == 0) throw std::invalid_argument("RecursionSpec: horizon must be positive");
    if (noise_amplitude < 0.0 || noise_amplitude >= 1.0)
      throw std::invalid_argument("RecursionSpec: noise_amplitude must be in [0, 1)");
    if (const auto* s = std::get_if<StrongCaseSpec>(&kind)) {
      if (s->c1 <= 0.0 || s->c2 < 0.0)
        throw std::invalid_argument("strong case: need c1 > 0 and c2 >= 0");
      if (!(s->theta > 0.0 && s->theta < 0.5))
        throw std::invalid_argument("strong case: theta must be in (0, 1/2)");
      if (!(s->epsilon > 0.0 && s->epsilon < 1.0))
        throw std::invalid_argument("strong case: epsilon must be in (0, 1)");
    } else if (const auto* r = std::get_if<RobbinsSiegmundSpec>(&kind)) {
      if (r->gamma_scale < 0.0 || r->z_scale < 0.0 || r->y1 < 0.0)
        throw std::invalid_argument("robbins_siegmund: negative parameter");
      if (r->gamma_scale > 0.0 && r->gamma_power <= 1.0)
        throw std::invalid_argument(
            "robbins_siegmund: gamma series must satisfy prod(1+gamma_t) < inf (gamma_power > 1)");
      if (r->z_scale > 0.0 && r->z_power <= 1.0)
        throw std::invalid_argument(
            "robbins_siegmund: Z series must be summable (z_power > 1)");
      if (!(r->x_fraction > 0.0 && r->x_fraction <= 1.0))
        throw std::invalid_argument("robbins_siegmund: x_fraction must be in (0, 1]");
    } else {
      const auto& c = std::get<ConvexCaseSpec>(kind);
      if (c.c1 <= 0.0 || c.c2 < 0.0)
        throw std::invalid_argument("convex case: need c1 > 0 and c2 >= 0");
      if (!(c.epsilon > 0.0 && c.epsilon < 1.0 / 3.0))
        throw std::invalid_argument("convex case: epsilon must be in (0, 1/3)");
      if (c.kappa < 0.0) throw std::invalid_argument("convex case: kappa must be >= 0");
    }
  }
};

struct RecursionTrace {
  std::vector<std::uint64_t> grid;
  std::vector<double> y;       // Y_t at grid points
  std::vector<double> scaled;  // t^p Y_t for the kind's reporting exponent
  double scaling_exponent = 0.0;
  double alpha_scale_used = 0.0;
  double sum_x = 0.0;  // Robbins-Siegmund only
};

/// Max of the scaled series over grid points in [horizon/2, horizon].
inline double tail_max_scaled(const RecursionTrace& tr, std::uint64_t horizon) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.grid.size(); ++i)
    if (tr.grid[i] >= horizon / 2 && tr.grid[i] <= horizon) m = std::max(m, tr.scaled[i]);
  if (!std::isfinite(m)) throw std::invalid_argument("tail_max_scaled: window has no grid points");
  return m;
}

inline double tail_oscillation(const RecursionTrace& tr, std::uint64_t horizon) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < tr.grid.size(); ++i)
    if (tr.grid[i] >= horizon / 10 && tr.grid[i] <= horizon) {
      lo = std::min(lo, tr.y[i]);
      hi = std::max(hi, tr.y[i]);
    }
  if (!(hi >= lo)) throw std::invalid_argument("tail_oscillation: window has no grid points");
  return hi - lo;
}

/// The multiplicative noise factor: mean one, support [1-a, 1+a], so the
/// conditional expectation of the noisy recursion equals the noiseless
/// right-hand side exactly and Y stays nonnegative.
inline double noise_factor(double amplitude, RandomStream& rng) {
  return amplitude == 0.0 ? 1.0 : 1.0 + amplitude * rng.uniform_sym();
}

inline RecursionTrace simulate_strong_recursion(const RecursionSpec& spec, RandomStream& rng,
                                                std::size_t grid_points = 400) {
  spec.validate();
  const auto& s = std::get<StrongCaseSpec>(spec.kind);
  double a = s.alpha_scale;
  if (a <= 0.0 || s.c1 * a >= 1.0) a = 0.5 / s.c1;
  const double p = 1.0 - s.theta;

  RecursionTrace tr;
  tr.grid = log_grid(spec.horizon, grid_points);
  tr.scaling_exponent = 1.0 - s.epsilon;
  tr.alpha_scale_used = a;
  tr.y.reserve(tr.grid.size());
  tr.scaled.reserve(tr.grid.size());

  double y = 1.0;
  std::size_t gi = 0;
  for (std::uint64_t t = 1; t <= spec.horizon; ++t) {
    if (gi < tr.grid.size() && t == tr.grid[gi]) {
      tr.y.push_back(y);
      tr.scaled.push_back(std::pow(static_cast<double>(t), tr.scaling_exponent) * y);
      ++gi;
    }
    const double alpha = a / std::pow(static_cast<double>(t), p);
    y = ((1.0 - s.c1 * alpha) * y + s.c2 * alpha * alpha) * noise_factor(spec.noise_amplitude, rng);
  }
  return tr;
}

struct RobbinsSiegmundResult {
  RecursionTrace trace;
  double tail_oscillation = 0.0;  // max - min of Y over the last decade
  double sum_x = 0.0;
  bool y_converges = false;  // Cauchy-style criterion on the tail
};

inline RobbinsSiegmundResult simulate_robbins_siegmund(const RecursionSpec& spec,
                                                       RandomStream& rng,
                                                       std::size_t grid_points = 400) {
  spec.validate();
  const auto& r = std::get<RobbinsSiegmundSpec>(spec.kind);

  RobbinsSiegmundResult res;
  RecursionTrace& tr = res.trace;
  tr.grid = log_grid(spec.horizon, grid_points);
  tr.scaling_exponent = 0.0;
  tr.y.reserve(tr.grid.size());
  tr.scaled.reserve(tr.grid.size());

  double y = r.y1, sum_x = 0.0;
  std::size_t gi = 0;
  for (std::uint64_t t = 1; t <= spec.horizon; ++t) {
    if (gi < tr.grid.size() && t == tr.grid[gi]) {
      tr.y.push_back(y);
      tr.scaled.push_back(y);
      ++gi;
    }
    const double td = static_cast<double>(t);
    const double gamma = r.gamma_scale > 0.0 ? r.gamma_scale / std::pow(td, r.gamma_power) : 0.0;
    const double z = r.z_scale > 0.0 ? r.z_scale / std::pow(td, r.z_power) *
                                           noise_factor(spec.noise_amplitude, rng)
                                     : 0.0;
    double x = r.x_fraction * y;
    if (r.x_cap_scale > 0.0) {
      const double lg = std::log(td + 1.0);
      x = std::min(x, r.x_cap_scale / (td * lg * lg));
    }
    sum_x += x;
    y = (1.0 + gamma) * y - x + z;
  }
  tr.sum_x = sum_x;
  res.sum_x = sum_x;
  res.tail_oscillation = tail_oscillation(tr, spec.horizon);
  res.y_converges = res.tail_oscillation < 1e-4 * std::max(1.0, r.y1);
  return res;
}

inline RecursionTrace simulate_convex_recursion(const RecursionSpec& spec, RandomStream& rng,
                                                std::size_t grid_points = 400) {
  spec.validate();
  const auto& c = std::get<ConvexCaseSpec>(spec.kind);
  double a = c.alpha_scale;
  if (a <= 0.0 || c.c1 * a >= 1.0) a = 0.5 / c.c1;
  const double p = 2.0 / 3.0 + c.epsilon;

  RecursionTrace tr;
  tr.grid = log_grid(spec.horizon, grid_points);
  tr.scaling_exponent = 1.0 / 3.0 - c.epsilon;
  tr.alpha_scale_used = a;
  tr.y.reserve(tr.grid.size());
  tr.scaled.reserve(tr.grid.size());

  double y = 1.0;
  std::size_t gi = 0;
  for (std::uint64_t t = 1; t <= spec.horizon; ++t) {
    if (gi < tr.grid.size() && t == tr.grid[gi]) {
      tr.y.push_back(y);
      tr.scaled.push_back(std::pow(static_cast<double>(t), tr.scaling_exponent) * y);
      ++gi;
    }
    const double alpha = a / std::pow(static_cast<double>(t), p);
    y = (1.0 + c.c1 * alpha * alpha) * y + c.c2 * alpha * alpha;
    if (c.kappa > 0.0) y *= std::max(0.0, 1.0 - c.kappa * alpha * y / (1.0 + y));
    y *= noise_factor(spec.noise_amplitude, rng);
  }
  return tr;
}

}  // namespace sgm
