#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sgm/problems.hpp"
#include "sgm/random.hpp"

namespace sgm {

struct AdditiveGaussianNoise {
  double sigma = 0.0;
};

struct MultiplicativeRelativeNoise {
  double sigma = 0.0;
};

struct FiniteSumNoise {
  int n_components = 0;
  std::uint64_t seed = 0;
};

using NoiseModel =
    std::variant<AdditiveGaussianNoise, MultiplicativeRelativeNoise, FiniteSumNoise>;

/// Unbiased stochastic gradient sampler with declared second-moment constants
/// E||g||^2 <= A (f - f*) + B ||grad f||^2 + C. Immutable; all randomness
/// comes from the caller's stream.
class GradientOracle {
 public:
  GradientOracle(std::shared_ptr<const ProblemInstance> problem, NoiseModel model)
      : problem_(std::move(problem)), model_(model) {
    if (!problem_) throw std::invalid_argument("GradientOracle: null problem");
    if (const auto* ag = std::get_if<AdditiveGaussianNoise>(&model_)) {
      if (ag->sigma < 0) throw std::invalid_argument("additive_gaussian: sigma must be >= 0");
      declared_a_ = 0.0;
      declared_b_ = 1.0;
      declared_c_ = ag->sigma * ag->sigma * static_cast<double>(problem_->dimension);
    } else if (const auto* mr = std::get_if<MultiplicativeRelativeNoise>(&model_)) {
      if (mr->sigma < 0) throw std::invalid_argument("multiplicative_relative: sigma must be >= 0");
      declared_a_ = 0.0;
      declared_b_ = 1.0 + mr->sigma * mr->sigma;
      declared_c_ = 0.0;
    } else {
      const auto& fs = std::get<FiniteSumNoise>(model_);
      if (fs.n_components < 1)
        throw std::invalid_argument("finite_sum: n_components must be positive");
      // Component gradients are grad f + delta_i with the deltas centred so
      // they sum to zero; the average component is exactly the base problem.
      RandomStream rng = RandomStream::derived(fs.seed, 0xF1717E);
      const Eigen::Index d = problem_->dimension;
      deltas_.resize(static_cast<std::size_t>(fs.n_components));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (auto& dv : deltas_) {
        dv = rng.normal_vector(d);
        mean += dv;
      }
      mean /= static_cast<double>(fs.n_components);
      double spread = 0.0;
      for (auto& dv : deltas_) {
        dv -= mean;
        spread += dv.squaredNorm();
      }
      declared_a_ = 0.0;
      declared_b_ = 1.0;
      declared_c_ = spread / static_cast<double>(fs.n_components);
    }
  }

  const ProblemInstance& problem() const { return *problem_; }
  const NoiseModel& noise_model() const { return model_; }
  double declared_A() const { return declared_a_; }
  double declared_B() const { return declared_b_; }
  double declared_C() const { return declared_c_; }

  /// Applies the sampling law to an already-computed exact gradient. This is
  /// the single noise path; sample_gradient goes through it too.
  void sample_from_grad(const Eigen::VectorXd& true_grad, RandomStream& rng,
                        Eigen::VectorXd& g_out) const {
    if (const auto* ag = std::get_if<AdditiveGaussianNoise>(&model_)) {
      g_out = true_grad;
      if (ag->sigma > 0.0)
        for (Eigen::Index i = 0; i < g_out.size(); ++i) g_out[i] += ag->sigma * rng.normal();
    } else if (const auto* mr = std::get_if<MultiplicativeRelativeNoise>(&model_)) {
      g_out = (1.0 + mr->sigma * rng.normal()) * true_grad;
    } else {
      g_out = true_grad + deltas_[rng.uniform_index(deltas_.size())];
    }
  }

  void sample_gradient(const Eigen::VectorXd& x, RandomStream& rng,
                       Eigen::VectorXd& g_out) const {
    if (!x.allFinite()) throw std::domain_error("sample_gradient: non-finite query point");
    Eigen::VectorXd tg(problem_->dimension);
    problem_->grad_fn(x, tg);
    sample_from_grad(tg, rng, g_out);
  }

  Eigen::VectorXd sample_gradient(const Eigen::VectorXd& x, RandomStream& rng) const {
    Eigen::VectorXd g(problem_->dimension);
    sample_gradient(x, rng, g);
    return g;
  }

 private:
  std::shared_ptr<const ProblemInstance> problem_;
  NoiseModel model_;
  double declared_a_ = 0.0, declared_b_ = 0.0, declared_c_ = 0.0;
  std::vector<Eigen::VectorXd> deltas_;
};

struct AbcProbeResult {
  double lhs_mean = 0.0;  // empirical E||g||^2
  double lhs_se = 0.0;    // Monte Carlo standard error of lhs_mean
  double rhs = 0.0;       // A (f-f*) + B ||grad||^2 + C with declared constants
  double margin_se = 0.0; // (rhs - lhs) in standard errors; negative = bound exceeded
};

struct AbcReport {
  std::vector<AbcProbeResult> probes;
  bool violated = false;  // any margin below -4 SE
};

/// Empirical check of second-moment constants (A, B, C) at the given probe
/// points. The default entry point checks the oracle's own declared constants;
/// the explicit overload exists so deliberately mis-declared bounds can be
/// exercised as negative controls.
inline AbcReport estimate_abc_with(const GradientOracle& oracle, double A, double B, double C,
                                   const std::vector<Eigen::VectorXd>& probe_points,
                                   std::size_t samples_per_point, RandomStream& rng) {
  if (probe_points.empty()) throw std::invalid_argument("estimate_abc: empty probe list");
  if (samples_per_point < 1000)
    throw std::invalid_argument("estimate_abc: need at least 1e3 samples per point");

  const ProblemInstance& p = oracle.problem();
  AbcReport report;
  Eigen::VectorXd g(p.dimension);
  for (const auto& x : probe_points) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t s = 0; s < samples_per_point; ++s) {
      oracle.sample_gradient(x, rng, g);
      double v = g.squaredNorm();
      sum += v;
      sumsq += v * v;
    }
    const double n = static_cast<double>(samples_per_point);
    AbcProbeResult r;
    r.lhs_mean = sum / n;
    double var = std::max(0.0, sumsq / n - r.lhs_mean * r.lhs_mean);
    r.lhs_se = std::sqrt(var / n);
    double fgap = p.value(x) - p.optimal_value;
    double gn = p.gradient(x).squaredNorm();
    r.rhs = A * fgap + B * gn + C;
    r.margin_se = r.lhs_se > 0.0 ? (r.rhs - r.lhs_mean) / r.lhs_se
                                 : (r.rhs >= r.lhs_mean ? 0.0 : -std::numeric_limits<double>::infinity());
    // violation = bound exceeded by more than 4 SE plus a relative guard that
    // keeps exact (zero-variance) oracles from tripping on accumulation ulps
    const double slack = 4.0 * r.lhs_se + 1e-12 * std::max(1.0, std::abs(r.lhs_mean));
    if (r.lhs_mean - r.rhs > slack) report.violated = true;
    report.probes.push_back(r);
  }
  return report;
}

inline AbcReport estimate_abc(const GradientOracle& oracle,
                              const std::vector<Eigen::VectorXd>& probe_points,
                              std::size_t samples_per_point, RandomStream& rng) {
  return estimate_abc_with(oracle, oracle.declared_A(), oracle.declared_B(),
                           oracle.declared_C(), probe_points, samples_per_point, rng);
}

}  // namespace sgm
