#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Core>

namespace sgm {

/// Counter-style stream derivation: the per-trajectory seed is a hash of
/// (master_seed, stream_index), so streams are reproducible regardless of
/// execution order or worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 0x51ED2701));
}

/// Self-contained random stream owned by a single trajectory / worker.
/// All stochastic state lives here; problems, oracles and schedules stay
/// immutable and shareable.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derived(std::uint64_t master_seed, std::uint64_t stream_index) {
    return RandomStream(derive_stream_seed(master_seed, stream_index));
  }

  double normal() { return normal_(engine_); }

  double uniform01() { return unit_(engine_); }

  /// Uniform on [-1, 1].
  double uniform_sym() { return sym_(engine_); }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  void fill_normal(Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
  }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd v(d);
    fill_normal(v);
    return v;
  }

  /// Uniform draw from the ball of the given radius centred at the origin.
  Eigen::VectorXd ball_point(Eigen::Index d, double radius) {
    Eigen::VectorXd v = normal_vector(d);
    double n = v.norm();
    if (n == 0.0) return Eigen::VectorXd::Zero(d);
    double r = radius * std::pow(uniform01(), 1.0 / static_cast<double>(d));
    return v * (r / n);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::uniform_real_distribution<double> sym_{-1.0, 1.0};
};

}  // namespace sgm
