#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

namespace sgm {

enum class Method { SGD, SHB, SNAG };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::SGD: return "sgd";
    case Method::SHB: return "shb";
    case Method::SNAG: return "snag";
  }
  return "?";
}

/// Iterate plus momentum memory.
///
/// `memory` is the method's one-step history: x_{t-1} for SHB and the
/// gradient-step point y_t for SNAG (both equal x at t=1, so v_1 = 0).
/// With v_t := x_t - memory_t, both momentum methods share
///   z_t = x_t + (beta/(1-beta)) v_t,
/// which is exactly the sequence obeying z_{t+1} = z_t - alpha_t/(1-beta) g_t.
struct OptimizerState {
  Method method = Method::SGD;
  double beta = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd memory;
  std::uint64_t t = 1;

  static OptimizerState init(Method method, double beta, Eigen::VectorXd x0) {
    if (method == Method::SGD) beta = 0.0;
    if (beta < 0.0 || beta >= 1.0)
      throw std::invalid_argument("OptimizerState: beta must be in [0, 1)");
    OptimizerState s;
    s.method = method;
    s.beta = beta;
    s.memory = x0;
    s.x = std::move(x0);
    s.t = 1;
    return s;
  }
};

namespace detail {

inline void check_step_args(const OptimizerState& s, const Eigen::VectorXd& g, double alpha) {
  if (g.size() != s.x.size()) throw std::invalid_argument("step: gradient dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("step: alpha must be positive");
  if (!g.allFinite()) throw std::domain_error("step: non-finite gradient");
}

/// Computes (x_next, memory_next) into the provided buffers. Shared by the
/// pure and in-place step paths so they are arithmetically identical.
inline void step_kernel(const OptimizerState& s, const Eigen::VectorXd& g, double alpha,
                        Eigen::VectorXd& x_next, Eigen::VectorXd& memory_next) {
  switch (s.method) {
    case Method::SGD:
      x_next = s.x - alpha * g;
      memory_next = x_next;
      break;
    case Method::SHB:
      if (s.beta == 0.0) {
        x_next = s.x - alpha * g;
      } else {
        x_next = s.x - alpha * g + s.beta * (s.x - s.memory);
      }
      memory_next = s.x;
      break;
    case Method::SNAG: {
      // y_{t+1} = x_t - alpha g_t; x_{t+1} = y_{t+1} + beta (y_{t+1} - y_t)
      memory_next = s.x - alpha * g;  // y_{t+1}
      if (s.beta == 0.0) {
        x_next = memory_next;
      } else {
        x_next = memory_next + s.beta * (memory_next - s.memory);
      }
      break;
    }
  }
}

}  // namespace detail

/// Pure step: depends only on its arguments, enabling replay.
inline OptimizerState step(const OptimizerState& s, const Eigen::VectorXd& g, double alpha) {
  detail::check_step_args(s, g, alpha);
  OptimizerState next;
  next.method = s.method;
  next.beta = s.beta;
  detail::step_kernel(s, g, alpha, next.x, next.memory);
  next.t = s.t + 1;
  return next;
}

/// Allocation-free variant for hot loops; `scratch` must persist across calls.
inline void step_in_place(OptimizerState& s, const Eigen::VectorXd& g, double alpha,
                          Eigen::VectorXd& x_scratch, Eigen::VectorXd& mem_scratch) {
  detail::check_step_args(s, g, alpha);
  detail::step_kernel(s, g, alpha, x_scratch, mem_scratch);
  s.x.swap(x_scratch);
  s.memory.swap(mem_scratch);
  ++s.t;
}

/// Derived momentum diagnostics: v_t = x_t - memory_t and
/// z_t = x_t + (beta/(1-beta)) v_t. SGD returns (0, x) by convention.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> momentum_aux(const OptimizerState& s) {
  if (s.method == Method::SGD || s.beta == 0.0)
    return {Eigen::VectorXd::Zero(s.x.size()), s.x};
  Eigen::VectorXd v = s.x - s.memory;
  Eigen::VectorXd z = s.x + (s.beta / (1.0 - s.beta)) * v;
  return {std::move(v), std::move(z)};
}

/// State of the rewritten recursions
///   SHB:  v+ = beta v - alpha g          SNAG: v+ = beta v - beta alpha g
///   both: z+ = z - alpha/(1-beta) g
/// evolved independently of the direct iteration; x is recoverable as
/// x = z - (beta/(1-beta)) v.
struct ReformulatedState {
  Eigen::VectorXd v;
  Eigen::VectorXd z;
};

inline ReformulatedState step_reformulated(const ReformulatedState& s, const Eigen::VectorXd& g,
                                           double alpha, double beta, Method method) {
  if (method == Method::SGD)
    throw std::invalid_argument("step_reformulated: method must be SHB or SNAG");
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("step_reformulated: beta must be in [0, 1)");
  if (g.size() != s.v.size() || g.size() != s.z.size())
    throw std::invalid_argument("step_reformulated: dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("step_reformulated: alpha must be positive");
  if (!g.allFinite()) throw std::domain_error("step_reformulated: non-finite gradient");

  ReformulatedState next;
  const double gscale = method == Method::SHB ? alpha : beta * alpha;
  next.v = beta * s.v - gscale * g;
  next.z = s.z - (alpha / (1.0 - beta)) * g;
  return next;
}

inline Eigen::VectorXd reconstruct_x(const ReformulatedState& s, double beta) {
  return s.z - (beta / (1.0 - beta)) * s.v;
}

}  // namespace sgm
