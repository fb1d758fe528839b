#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sgm/analysis.hpp"
#include "sgm/optimizers.hpp"
#include "sgm/oracle.hpp"
#include "sgm/problems.hpp"
#include "sgm/random.hpp"
#include "sgm/schedules.hpp"

namespace sgm {

struct ZeroInit {};
struct RandomBallInit {
  double radius = 5.0;
};
struct ExplicitInit {
  Eigen::VectorXd point;
};
using InitSpec = std::variant<ZeroInit, RandomBallInit, ExplicitInit>;

/// Everything needed to reproduce an experiment. The serialized form and its
/// digest live in config.hpp; this is the in-memory assembly.
struct Experiment {
  std::shared_ptr<const ProblemInstance> problem;
  std::shared_ptr<const GradientOracle> oracle;
  Schedule schedule;  // requested; see effective_schedule
  Method method = Method::SGD;
  double beta = 0.0;
  std::uint64_t horizon = 1000;
  std::uint64_t n_seeds = 1;
  std::uint64_t master_seed = 0;
  std::size_t record_points = 200;
  InitSpec x_init = RandomBallInit{};
  double divergence_threshold = 1e12;
  bool record_iterates = false;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::string config_digest;
};

/// Largest first step size admitted by the proofs' binding constraints,
///   (L A / 2 + L B mu) alpha <= mu   (strongly convex case, mu > 0)
///   L B alpha <= 1                   (smoothness case)
/// with the momentum methods measured through their effective step
/// alpha/(1-beta). Infinite when the constants impose no bound.
inline double binding_step_cap(const ProblemInstance& p, const GradientOracle& o, double beta) {
  const double L = p.smoothness_L, mu = p.strong_convexity_mu;
  const double A = o.declared_A(), B = o.declared_B();
  double cap = std::numeric_limits<double>::infinity();
  if (L * B > 0.0) cap = std::min(cap, 1.0 / (L * B));
  if (mu > 0.0) {
    const double denom = L * A / 2.0 + L * B * mu;
    if (denom > 0.0) cap = std::min(cap, mu / denom);
  }
  return cap * (1.0 - beta);
}

/// Regime-tagged schedules get their scale clamped to the binding cap
/// (scale <= 0 requests the cap itself). Custom schedules are honored
/// verbatim so deliberately unstable configurations stay expressible.
inline Schedule effective_schedule(const Experiment& ex) {
  Schedule s = ex.schedule;
  if (s.regime == RegimeTag::Custom) {
    if (s.scale <= 0.0) throw std::invalid_argument("custom schedule requires a positive scale");
    return s;
  }
  const double cap = binding_step_cap(*ex.problem, *ex.oracle, ex.beta);
  if (!std::isfinite(cap) && s.scale <= 0.0)
    throw std::invalid_argument("auto-scaling needs a finite binding cap; set scale explicitly");
  double scale = s.scale <= 0.0 ? cap : std::min(s.scale, cap);
  return s.with_scale(scale);
}

inline Eigen::VectorXd initial_point(const InitSpec& init, Eigen::Index d, RandomStream& rng) {
  if (std::holds_alternative<ZeroInit>(init)) return Eigen::VectorXd::Zero(d);
  if (const auto* rb = std::get_if<RandomBallInit>(&init)) return rng.ball_point(d, rb->radius);
  const auto& e = std::get<ExplicitInit>(init);
  if (e.point.size() != d) throw std::invalid_argument("x_init: explicit point has wrong dimension");
  return e.point;
}

/// One seeded trajectory. The stream is derived from (master_seed, seed_index)
/// so results are independent of scheduling; the initial point is drawn from
/// the stream before the first step.
inline TrajectoryRecord run_trajectory(const Experiment& ex, std::uint64_t seed_index) {
  if (seed_index >= ex.n_seeds) throw std::invalid_argument("run_trajectory: seed_index out of range");
  const ProblemInstance& prob = *ex.problem;
  const GradientOracle& oracle = *ex.oracle;
  const Schedule sched = effective_schedule(ex);
  const double fstar = prob.optimal_value;
  const double guard = ex.divergence_threshold;

  RandomStream rng = RandomStream::derived(ex.master_seed, seed_index);
  Eigen::VectorXd x0 = initial_point(ex.x_init, prob.dimension, rng);
  OptimizerState state = OptimizerState::init(ex.method, ex.beta, std::move(x0));

  const std::vector<std::uint64_t> grid = log_grid(ex.horizon, ex.record_points);

  TrajectoryRecord rec;
  rec.seed_index = seed_index;
  rec.config_digest = ex.config_digest;
  rec.sample_grid.reserve(grid.size());
  rec.f_gap.reserve(grid.size());
  rec.grad_norm_sq.reserve(grid.size());
  rec.v_norm_sq.reserve(grid.size());
  rec.z_gap.reserve(grid.size());
  rec.grad_min.reserve(grid.size());
  rec.y_weighted.reserve(grid.size());

  Eigen::VectorXd true_grad(prob.dimension), g(prob.dimension);
  Eigen::VectorXd x_scratch(prob.dimension), mem_scratch(prob.dimension);
  WeightedAverageAccumulator y_acc;
  double grad_min = std::numeric_limits<double>::infinity();
  std::size_t gi = 0;

  for (std::uint64_t t = 1; t <= ex.horizon; ++t) {
    const double alpha = step_size(sched, t);
    prob.grad_fn(state.x, true_grad);
    const double gnsq = true_grad.squaredNorm();
    if (!std::isfinite(gnsq)) {
      rec.diverged = true;
      break;
    }
    grad_min = std::min(grad_min, gnsq);
    const double y_val = y_acc.update(gnsq, alpha);  // Y_{t+1}, the average of X_1..X_t

    if (gi < grid.size() && t == grid[gi]) {
      const double fgap = std::max(prob.value(state.x) - fstar, kGapClip);
      if (!std::isfinite(fgap) || fgap > guard || state.x.norm() > guard) {
        rec.diverged = true;
        break;
      }
      auto [v, z] = momentum_aux(state);
      rec.sample_grid.push_back(t);
      rec.f_gap.push_back(fgap);
      rec.grad_norm_sq.push_back(gnsq);
      rec.v_norm_sq.push_back(v.squaredNorm());
      rec.z_gap.push_back(std::max(prob.value(z) - fstar, kGapClip));
      rec.grad_min.push_back(grad_min);
      rec.y_weighted.push_back(y_val);
      if (ex.record_iterates) rec.iterates.push_back(state.x);
      ++gi;
    }

    oracle.sample_from_grad(true_grad, rng, g);
    try {
      step_in_place(state, g, alpha, x_scratch, mem_scratch);
    } catch (const std::domain_error&) {
      rec.diverged = true;  // non-finite gradient fed the step
      break;
    }
    if ((t & 63) == 0 && state.x.squaredNorm() > guard * guard) {
      rec.diverged = true;
      break;
    }
  }
  return rec;
}

/// Which recorded series carries the regime's rate claim.
inline std::vector<std::string> fit_series_for(RegimeTag regime) {
  switch (regime) {
    case RegimeTag::NonConvexRegime: return {"grad_min", "y_weighted"};
    case RegimeTag::StronglyConvexRegime:
    case RegimeTag::LastIterateRegime:
    case RegimeTag::Custom: return {"f_gap"};
  }
  return {"f_gap"};
}

inline const std::vector<double>& series_by_name(const TrajectoryRecord& r,
                                                 const std::string& name) {
  if (name == "f_gap") return r.f_gap;
  if (name == "grad_norm_sq") return r.grad_norm_sq;
  if (name == "v_norm_sq") return r.v_norm_sq;
  if (name == "z_gap") return r.z_gap;
  if (name == "grad_min") return r.grad_min;
  if (name == "y_weighted") return r.y_weighted;
  throw std::invalid_argument("unknown series: " + name);
}

struct SeriesFit {
  std::uint64_t seed_index = 0;
  std::string series;
  RateFit fit;
};

struct ExperimentResult {
  std::vector<TrajectoryRecord> records;  // ordered by seed index
  std::vector<SeriesFit> fits;            // converged seeds only
  double diverged_fraction = 0.0;
  Schedule effective;                     // schedule actually applied
  std::vector<std::string> fit_series;
};

/// Runs every seed (in parallel when allowed), fits the regime series per
/// seed, and reports order statistics. Diverged seeds are excluded from fits
/// but counted in diverged_fraction.
inline ExperimentResult run_experiment(const Experiment& ex, double window_fraction = 0.5) {
  ExperimentResult out;
  out.effective = effective_schedule(ex);
  out.fit_series = fit_series_for(ex.schedule.regime);
  out.records.resize(ex.n_seeds);

  unsigned nthreads = ex.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : ex.threads;
  nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(ex.n_seeds));
  if (nthreads <= 1) {
    for (std::uint64_t s = 0; s < ex.n_seeds; ++s) out.records[s] = run_trajectory(ex, s);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::uint64_t s = next.fetch_add(1);
          if (s >= ex.n_seeds) return;
          out.records[s] = run_trajectory(ex, s);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::size_t diverged = 0;
  for (std::uint64_t s = 0; s < ex.n_seeds; ++s) {
    const TrajectoryRecord& rec = out.records[s];
    if (rec.diverged) {
      ++diverged;
      continue;
    }
    for (const auto& name : out.fit_series) {
      SeriesFit sf;
      sf.seed_index = s;
      sf.series = name;
      sf.fit = fit_rate(rec.sample_grid, series_by_name(rec, name), window_fraction);
      out.fits.push_back(std::move(sf));
    }
  }
  out.diverged_fraction = ex.n_seeds == 0 ? 0.0
                                          : static_cast<double>(diverged) /
                                                static_cast<double>(ex.n_seeds);
  return out;
}

/// Fits for one named series across seeds.
inline std::vector<RateFit> fits_for_series(const ExperimentResult& res, const std::string& name) {
  std::vector<RateFit> fits;
  for (const auto& sf : res.fits)
    if (sf.series == name) fits.push_back(sf.fit);
  return fits;
}

}  // namespace sgm
