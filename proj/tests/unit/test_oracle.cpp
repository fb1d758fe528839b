#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "sgm/oracle.hpp"
#include "sgm/problems.hpp"

using namespace sgm;

namespace {
std::shared_ptr<const ProblemInstance> quad(Eigen::Index d, std::uint64_t seed = 1) {
  return std::make_shared<ProblemInstance>(make_quadratic(d, 0.5, 4.0, seed));
}
}  // namespace

TEST_CASE("additive gaussian with sigma 0 is the exact gradient") {
  GradientOracle oracle(quad(5), AdditiveGaussianNoise{0.0});
  RandomStream rng(1);
  Eigen::VectorXd x = rng.normal_vector(5);
  REQUIRE(oracle.sample_gradient(x, rng) == oracle.problem().gradient(x));
  REQUIRE(oracle.declared_A() == 0.0);
  REQUIRE(oracle.declared_B() == 1.0);
  REQUIRE(oracle.declared_C() == 0.0);
}

TEST_CASE("additive gaussian second moment matches the closed form") {
  // E||g||^2 = ||grad f(x)||^2 + sigma^2 d, checked to 4 Monte Carlo SEs
  const double sigma = 0.5;
  auto p = quad(10);
  GradientOracle oracle(p, AdditiveGaussianNoise{sigma});
  RandomStream rng(2);
  Eigen::VectorXd x = rng.normal_vector(10);
  const double expected = p->gradient(x).squaredNorm() + sigma * sigma * 10.0;

  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd g(10);
  for (int i = 0; i < n; ++i) {
    oracle.sample_gradient(x, rng, g);
    const double v = g.squaredNorm();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  REQUIRE(std::abs(mean - expected) <= 4.0 * se);
}

TEST_CASE("multiplicative noise vanishes at a stationary point") {
  auto p = quad(6);
  GradientOracle oracle(p, MultiplicativeRelativeNoise{0.7});
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i)
    REQUIRE(oracle.sample_gradient(*p->minimizer, rng).norm() == 0.0);
  REQUIRE(oracle.declared_B() == 1.0 + 0.49);
}

TEST_CASE("finite-sum components average to the base gradient") {
  auto p = quad(4);
  GradientOracle oracle(p, FiniteSumNoise{8, 21});
  RandomStream rng(4);
  Eigen::VectorXd x = rng.normal_vector(4);
  const Eigen::VectorXd tg = p->gradient(x);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  const int n = 200000;
  Eigen::VectorXd g(4);
  for (int i = 0; i < n; ++i) {
    oracle.sample_gradient(x, rng, g);
    mean += g;
  }
  mean /= n;
  // per-coordinate deviation within 4 sigma_emp / sqrt(n); C bounds the spread
  const double bound = 4.0 * std::sqrt(oracle.declared_C() / n) + 1e-12;
  for (int i = 0; i < 4; ++i) REQUIRE(std::abs(mean[i] - tg[i]) <= bound);
  REQUIRE(oracle.declared_C() > 0.0);
}

TEST_CASE("per-coordinate unbiasedness across noise models") {
  auto p = quad(5);
  RandomStream rng(41);
  std::vector<NoiseModel> models = {AdditiveGaussianNoise{0.6},
                                    MultiplicativeRelativeNoise{0.6}, FiniteSumNoise{7, 42}};
  for (const auto& model : models) {
    GradientOracle oracle(p, model);
    for (int probe = 0; probe < 3; ++probe) {
      Eigen::VectorXd x = rng.ball_point(5, 5.0);
      const Eigen::VectorXd tg = p->gradient(x);
      const int n = 100000;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(5), sumsq = Eigen::VectorXd::Zero(5);
      Eigen::VectorXd g(5);
      for (int i = 0; i < n; ++i) {
        oracle.sample_gradient(x, rng, g);
        sum += g;
        sumsq += g.cwiseProduct(g);
      }
      for (int c = 0; c < 5; ++c) {
        const double mean = sum[c] / n;
        const double sd = std::sqrt(std::max(0.0, sumsq[c] / n - mean * mean));
        REQUIRE(std::abs(mean - tg[c]) <= 4.0 * sd / std::sqrt(double(n)) + 1e-12);
      }
    }
  }
}

TEST_CASE("oracle sampling is deterministic per stream state") {
  auto p = quad(5);
  GradientOracle oracle(p, AdditiveGaussianNoise{0.3});
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  RandomStream a(77), b(77);
  for (int i = 0; i < 50; ++i)
    REQUIRE(oracle.sample_gradient(x, a) == oracle.sample_gradient(x, b));
}

TEST_CASE("non-finite query point is rejected") {
  GradientOracle oracle(quad(3), AdditiveGaussianNoise{0.1});
  RandomStream rng(5);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(3, std::numeric_limits<double>::quiet_NaN());
  REQUIRE_THROWS_AS(oracle.sample_gradient(x, rng), std::domain_error);
}

TEST_CASE("estimate_abc: sigma 0 bound holds with zero margin slack") {
  auto p = quad(4);
  GradientOracle oracle(p, AdditiveGaussianNoise{0.0});
  RandomStream rng(6);
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 3; ++i) probes.push_back(rng.ball_point(4, 5.0));
  auto report = estimate_abc(oracle, probes, 1000, rng);
  REQUIRE_FALSE(report.violated);
  for (const auto& r : report.probes) {
    // lhs is the mean of identical exact values; equality up to summation ulps
    REQUIRE(r.lhs_mean - r.rhs <= 1e-12 * std::max(1.0, std::abs(r.lhs_mean)));
    REQUIRE(r.lhs_se == 0.0);
  }
}

TEST_CASE("estimate_abc: additive bound is tight") {
  auto p = quad(5);
  GradientOracle oracle(p, AdditiveGaussianNoise{1.0});
  RandomStream rng(7);
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(rng.ball_point(5, 5.0));
  auto report = estimate_abc(oracle, probes, 20000, rng);
  REQUIRE_FALSE(report.violated);
  for (const auto& r : report.probes) {
    // rhs - lhs is zero in expectation; allow 4 SEs either way
    REQUIRE(std::abs(r.rhs - r.lhs_mean) <= 4.0 * r.lhs_se);
  }
}

TEST_CASE("estimate_abc: under-declared C is flagged") {
  const double sigma = 1.0;
  auto p = quad(5);
  GradientOracle oracle(p, AdditiveGaussianNoise{sigma});
  RandomStream rng(8);
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(rng.ball_point(5, 5.0));
  const double half_c = 0.5 * sigma * sigma * 5.0;
  auto report = estimate_abc_with(oracle, 0.0, 1.0, half_c, probes, 20000, rng);
  REQUIRE(report.violated);
}

TEST_CASE("estimate_abc: input validation") {
  GradientOracle oracle(quad(3), AdditiveGaussianNoise{0.1});
  RandomStream rng(9);
  REQUIRE_THROWS_AS(estimate_abc(oracle, {}, 1000, rng), std::invalid_argument);
  std::vector<Eigen::VectorXd> probes{Eigen::VectorXd::Zero(3)};
  REQUIRE_THROWS_AS(estimate_abc(oracle, probes, 10, rng), std::invalid_argument);
}

TEST_CASE("declared constants pass estimate_abc for every built-in pairing") {
  std::vector<std::shared_ptr<const ProblemInstance>> problems = {
      quad(6, 31),
      std::make_shared<const ProblemInstance>(make_rank_deficient_least_squares(6, 3, 1.0, 32)),
      std::make_shared<const ProblemInstance>(make_smooth_nonconvex(6, 3.0, 33))};
  std::vector<NoiseModel> models = {AdditiveGaussianNoise{0.4},
                                    MultiplicativeRelativeNoise{0.4}, FiniteSumNoise{5, 34}};
  RandomStream rng(10);
  for (const auto& p : problems) {
    std::vector<Eigen::VectorXd> probes;
    for (int i = 0; i < 4; ++i) probes.push_back(rng.ball_point(6, 5.0));
    for (const auto& m : models) {
      GradientOracle oracle(p, m);
      auto report = estimate_abc(oracle, probes, 4000, rng);
      INFO("model index " << m.index());
      REQUIRE_FALSE(report.violated);
    }
  }
}
