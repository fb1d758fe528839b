#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "sgm/random.hpp"

namespace sgm {

enum class ConvexityClass { StronglyConvex, GeneralConvex, NonConvex };

inline const char* to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::StronglyConvex: return "strongly_convex";
    case ConvexityClass::GeneralConvex: return "general_convex";
    case ConvexityClass::NonConvex: return "non_convex";
  }
  return "?";
}

/// A smooth objective with known constants. Immutable after construction;
/// safe to share across trajectory workers.
struct ProblemInstance {
  Eigen::Index dimension = 0;
  std::function<double(const Eigen::VectorXd&)> value_fn;
  /// Writes the exact gradient of value_fn into `out` (sized by caller).
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> grad_fn;
  double smoothness_L = 0.0;
  double strong_convexity_mu = 0.0;  // 0 means not strongly convex
  double optimal_value = 0.0;
  std::optional<Eigen::VectorXd> minimizer;
  ConvexityClass convexity_class = ConvexityClass::GeneralConvex;

  double value(const Eigen::VectorXd& x) const { return value_fn(x); }

  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out.resize(dimension);
    grad_fn(x, out);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(dimension);
    grad_fn(x, g);
    return g;
  }
};

namespace detail {

/// Seeded Haar-ish orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign fixed so the result is deterministic in the seed.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, RandomStream& rng) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd rdiag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < d; ++j)
    if (rdiag[j] < 0) q.col(j) = -q.col(j);
  return q;
}

/// Log-uniformly spread grid on [lo, hi] with both endpoints attained.
inline Eigen::VectorXd log_spread(Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  if (n == 1) {
    v[0] = hi;
    return v;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  v[0] = lo;
  v[n - 1] = hi;
  return v;
}

}  // namespace detail

/// f(x) = 1/2 (x-x*)^T H (x-x*) + f0 with spectrum log-spread on [mu, L],
/// both endpoints attained, in a seeded random orthogonal basis.
inline ProblemInstance make_quadratic(Eigen::Index dimension, double mu, double L,
                                      std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("make_quadratic: dimension must be positive");
  if (mu <= 0.0) throw std::invalid_argument("make_quadratic: mu must be positive");
  if (L < mu) throw std::invalid_argument("make_quadratic: need mu <= L");
  if (dimension == 1 && mu != L)
    throw std::invalid_argument("make_quadratic: d=1 cannot attain both spectrum endpoints; use mu == L");

  RandomStream rng = RandomStream::derived(seed, 0xA11CE);
  Eigen::MatrixXd q = detail::random_orthogonal(dimension, rng);
  Eigen::VectorXd lam = detail::log_spread(dimension, mu, L);
  Eigen::MatrixXd h = q * lam.asDiagonal() * q.transpose();
  h = 0.5 * (h + h.transpose());  // exact symmetry

  Eigen::VectorXd xstar = rng.ball_point(dimension, 1.0);
  double f0 = rng.uniform_sym();

  ProblemInstance p;
  p.dimension = dimension;
  p.smoothness_L = L;
  p.strong_convexity_mu = mu;
  p.optimal_value = f0;
  p.minimizer = xstar;
  p.convexity_class = ConvexityClass::StronglyConvex;
  Eigen::VectorXd hx = h * xstar;
  p.value_fn = [h, xstar, f0](const Eigen::VectorXd& x) {
    Eigen::VectorXd r = x - xstar;
    return 0.5 * r.dot(h * r) + f0;
  };
  p.grad_fn = [h, hx](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out.noalias() = h * x;
    out -= hx;
  };
  return p;
}

/// f(x) = 1/2 ||M x - b||^2 with rank(M) < d and b in the range of M, so
/// f* = 0 is attained on an affine set. Nonzero spectrum of M^T M is
/// log-spread on [L/10, L]; minimizer is the minimum-norm solution.
inline ProblemInstance make_rank_deficient_least_squares(Eigen::Index dimension,
                                                         Eigen::Index rank, double L,
                                                         std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("least_squares: dimension must be positive");
  if (rank <= 0) throw std::invalid_argument("least_squares: rank must be positive");
  if (rank >= dimension) throw std::invalid_argument("least_squares: need rank < dimension");
  if (L <= 0.0) throw std::invalid_argument("least_squares: L must be positive");

  RandomStream rng = RandomStream::derived(seed, 0x5EED5);
  Eigen::MatrixXd q = detail::random_orthogonal(dimension, rng);
  Eigen::VectorXd lam = detail::log_spread(rank, L / 10.0, L);
  // M = D^{1/2} Q_r^T  (rank x d), so M^T M = Q_r D Q_r^T.
  Eigen::MatrixXd m = lam.cwiseSqrt().asDiagonal() * q.leftCols(rank).transpose();

  Eigen::VectorXd xtilde = rng.ball_point(dimension, 1.0);
  Eigen::VectorXd b = m * xtilde;
  Eigen::VectorXd minnorm = q.leftCols(rank) * (q.leftCols(rank).transpose() * xtilde);
  Eigen::MatrixXd g = m.transpose() * m;
  g = 0.5 * (g + g.transpose());
  Eigen::VectorXd c = m.transpose() * b;

  ProblemInstance p;
  p.dimension = dimension;
  p.smoothness_L = L;
  p.strong_convexity_mu = 0.0;
  p.optimal_value = 0.0;
  p.minimizer = minnorm;
  p.convexity_class = ConvexityClass::GeneralConvex;
  p.value_fn = [m, b](const Eigen::VectorXd& x) { return 0.5 * (m * x - b).squaredNorm(); };
  p.grad_fn = [g, c](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out.noalias() = g * x;
    out -= c;
  };
  return p;
}

/// f(x) = sum_i [ x_i^2/2 + a sin^2(x_i) ]; L = 1 + 2a, global minimum 0 at
/// the origin, non-convex once a > 1/2. The seed is accepted for config
/// uniformity; the family is deterministic.
inline ProblemInstance make_smooth_nonconvex(Eigen::Index dimension, double amplitude,
                                             std::uint64_t /*seed*/ = 0) {
  if (dimension <= 0) throw std::invalid_argument("smooth_nonconvex: dimension must be positive");
  if (amplitude < 0.0) throw std::invalid_argument("smooth_nonconvex: amplitude must be nonnegative");

  ProblemInstance p;
  p.dimension = dimension;
  p.smoothness_L = 1.0 + 2.0 * amplitude;
  p.strong_convexity_mu = 0.0;
  p.optimal_value = 0.0;
  p.minimizer = Eigen::VectorXd::Zero(dimension);
  p.convexity_class =
      amplitude > 0.5 ? ConvexityClass::NonConvex : ConvexityClass::GeneralConvex;
  const double a = amplitude;
  p.value_fn = [a](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double si = std::sin(x[i]);
      s += 0.5 * x[i] * x[i] + a * si * si;
    }
    return s;
  };
  p.grad_fn = [a](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] + a * std::sin(2.0 * x[i]);
  };
  return p;
}

}  // namespace sgm
