#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sgm/analysis.hpp"

using namespace sgm;

TEST_CASE("log_grid: endpoints, monotonicity, bounded size") {
  for (std::uint64_t T : {1ull, 10ull, 1000ull, 1000000ull}) {
    auto g = log_grid(T, 200);
    REQUIRE(g.front() == 1);
    REQUIRE(g.back() == T);
    for (std::size_t i = 1; i < g.size(); ++i) REQUIRE(g[i] > g[i - 1]);
    REQUIRE(g.size() <= 202);
  }
}

TEST_CASE("weighted average of a constant series is the constant") {
  std::vector<double> x(50, 3.25);
  auto y = weighted_average_sequence(x, Schedule::power(1.0, 0.8));
  for (double v : y) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(3.25, 1e-12));
}

TEST_CASE("weighted average: impulse example with the harmonic schedule") {
  // X = (1, 0, 0, ...), alpha_t = 1/t: Y_2 = 1 (w_1 = 2), Y_3 = 1/3
  std::vector<double> x = {1.0, 0.0, 0.0, 0.0};
  auto y = weighted_average_sequence(x, Schedule::power(1.0, 1.0));
  REQUIRE_THAT(y[0], Catch::Matchers::WithinAbs(1.0, 1e-15));        // Y_2
  REQUIRE_THAT(y[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));  // Y_3
  REQUIRE_THROWS_AS(weighted_average_sequence({-1.0}, Schedule::power(1.0, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("weighted average is a convex combination of the prefix") {
  std::vector<double> x;
  for (int t = 1; t <= 2000; ++t) x.push_back(std::abs(std::sin(0.37 * t)) + 0.01);
  auto y = weighted_average_sequence(x, Schedule::power(0.8, 0.6));
  double lo = x[0], hi = x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
    REQUIRE(y[i] >= lo - 1e-12);
    REQUIRE(y[i] <= hi + 1e-12);
  }
}

TEST_CASE("weighted average: summable-weighted series drives scaled Y to zero") {
  // alpha_t = 1/t, X_t = 1/(t alpha_t log^2(t+1)) = log^-2(t+1):
  // sum alpha_t X_t < inf, so (sum_{i<t} alpha_i) Y_t must vanish.
  // Frozen from the recursion itself: 0.668 / 0.588 / 0.526 at 1e5/1e6/1e7.
  WeightedAverageAccumulator acc;
  double sum_alpha_prev = 0.0, at5 = 0, at6 = 0, at7 = 0;
  for (std::uint64_t t = 1; t <= 10000000ull; ++t) {
    const double alpha = 1.0 / static_cast<double>(t);
    const double lg = std::log(static_cast<double>(t) + 1.0);
    const double x = 1.0 / (lg * lg);
    const double scaled = sum_alpha_prev * acc.current();
    if (t == 100000ull) at5 = scaled;
    if (t == 1000000ull) at6 = scaled;
    if (t == 10000000ull) at7 = scaled;
    acc.update(x, alpha);
    sum_alpha_prev += alpha;
  }
  REQUIRE(at5 > at6);
  REQUIRE(at6 > at7);
  REQUIRE_THAT(at7, Catch::Matchers::WithinAbs(0.526, 0.02));
}

TEST_CASE("running_min: examples and properties") {
  REQUIRE(running_min({3, 1, 2}) == std::vector<double>{3, 1, 1});
  std::vector<double> dec = {9, 7, 5, 2, 1};
  REQUIRE(running_min(dec) == dec);
  auto rm = running_min({5, 4, 6, 3, 8});
  for (std::size_t i = 1; i < rm.size(); ++i) REQUIRE(rm[i] <= rm[i - 1]);
  auto rm2 = running_min({5, 4, 6, 3, 8, 100, 200});
  REQUIRE(rm2[6] == rm[4]);
}

TEST_CASE("running min never exceeds the weighted average") {
  std::vector<double> x;
  for (int t = 1; t <= 500; ++t) x.push_back(1.0 + std::sin(0.9 * t) * 0.9);
  auto y = weighted_average_sequence(x, Schedule::power(1.0, 0.7));
  auto rm = running_min(x);
  // min_{i<=t} X_i <= Y_{t+1}: the average can never undercut the prefix min
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(rm[i] <= y[i] + 1e-12);
}

TEST_CASE("fit_rate: exact power laws are recovered exactly") {
  auto grid = log_grid(100000, 120);
  std::vector<double> inv_t, five_t04;
  for (auto t : grid) {
    inv_t.push_back(1.0 / static_cast<double>(t));
    five_t04.push_back(5.0 / std::pow(static_cast<double>(t), 0.4));
  }
  auto f1 = fit_rate(grid, inv_t, 1.0);
  REQUIRE_THAT(f1.exponent, Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(f1.r_squared, Catch::Matchers::WithinAbs(1.0, 1e-9));
  auto f2 = fit_rate(grid, five_t04, 1.0);
  REQUIRE_THAT(f2.exponent, Catch::Matchers::WithinAbs(0.4, 1e-9));
  REQUIRE_THAT(f2.log_intercept, Catch::Matchers::WithinAbs(std::log(5.0), 1e-9));
}

TEST_CASE("fit_rate: oscillating prefactor stays near the true exponent") {
  auto grid = log_grid(1000000, 200);
  std::vector<double> v;
  for (auto t : grid)
    v.push_back((2.0 + std::sin(std::log(static_cast<double>(t)))) / static_cast<double>(t));
  auto f = fit_rate(grid, v, 0.5);  // window [1e3, 1e6], three decades
  REQUIRE(f.exponent >= 0.9);
  REQUIRE(f.exponent <= 1.1);
}

TEST_CASE("fit_rate: error paths and the floor sentinel") {
  std::vector<std::uint64_t> grid = {1, 10, 100};
  REQUIRE_THROWS_AS(fit_rate(grid, {1.0, 0.5}, 0.5), std::invalid_argument);
  // too few positive points in the window
  REQUIRE_THROWS_AS(fit_rate(grid, {1.0, 0.0, 0.0}, 1.0), std::runtime_error);
  // all-zero tail after a positive start: infinite-exponent sentinel
  auto g2 = log_grid(10000, 40);
  std::vector<double> v(g2.size(), 0.0);
  v[0] = 1.0;
  auto f = fit_rate(g2, v, 0.5);
  REQUIRE(std::isinf(f.exponent));
}

TEST_CASE("fit_rate: points below the numerical floor are excluded and flagged") {
  auto grid = log_grid(1000000, 100);
  std::vector<double> v;
  for (auto t : grid) v.push_back(t < 100000 ? 1.0 / static_cast<double>(t) : 1e-20);
  auto f = fit_rate(grid, v, 1.0);
  REQUIRE(f.floor_clipped);
  REQUIRE_THAT(f.exponent, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("almost_sure_aggregate: order statistics") {
  std::vector<RateFit> fits(10);
  for (int i = 0; i < 10; ++i) fits[i].exponent = 0.8 + 0.1 * i;  // 0.8 .. 1.7
  auto agg = almost_sure_aggregate(fits, 0.05);
  REQUIRE_THAT(agg.quantile_exponent, Catch::Matchers::WithinAbs(0.8, 1e-15));
  REQUIRE_THAT(agg.fraction_above(1.0), Catch::Matchers::WithinAbs(0.7, 1e-15));
  REQUIRE(agg.min_exponent() == agg.quantile_exponent);

  for (auto& f : fits) f.exponent = 0.9;
  for (double q : {0.05, 0.5, 0.95})
    REQUIRE(almost_sure_aggregate(fits, q).quantile_exponent == 0.9);

  // permutation invariance
  std::vector<RateFit> shuffled = fits;
  for (int i = 0; i < 10; ++i) shuffled[i].exponent = 0.8 + 0.1 * ((i * 7) % 10);
  std::vector<RateFit> ordered = shuffled;
  std::sort(ordered.begin(), ordered.end(),
            [](const RateFit& a, const RateFit& b) { return a.exponent < b.exponent; });
  REQUIRE(almost_sure_aggregate(shuffled, 0.3).quantile_exponent ==
          almost_sure_aggregate(ordered, 0.3).quantile_exponent);

  REQUIRE_THROWS_AS(almost_sure_aggregate({}, 0.5), std::invalid_argument);
  fits.resize(5);
  REQUIRE_THROWS_AS(almost_sure_aggregate(fits, 0.5), std::invalid_argument);
}
