#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "sgm/runner.hpp"

using namespace sgm;

namespace {

Experiment base_experiment() {
  Experiment ex;
  ex.problem = std::make_shared<const ProblemInstance>(make_quadratic(6, 0.5, 5.0, 77));
  ex.oracle = std::make_shared<const GradientOracle>(ex.problem, AdditiveGaussianNoise{0.4});
  ex.schedule = Schedule::strongly_convex_regime(0.2);
  ex.method = Method::SGD;
  ex.horizon = 20000;
  ex.n_seeds = 4;
  ex.master_seed = 99;
  ex.record_points = 60;
  ex.config_digest = "test";
  return ex;
}

bool records_equal(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  return a.sample_grid == b.sample_grid && a.f_gap == b.f_gap &&
         a.grad_norm_sq == b.grad_norm_sq && a.v_norm_sq == b.v_norm_sq && a.z_gap == b.z_gap &&
         a.grad_min == b.grad_min && a.y_weighted == b.y_weighted && a.diverged == b.diverged;
}

}  // namespace

TEST_CASE("auto-scaling clamps regime schedules to the binding cap") {
  auto ex = base_experiment();
  // A=0, B=1: cap = (1-beta) min(1/L, mu/(L mu)) = 1/L
  const double cap = binding_step_cap(*ex.problem, *ex.oracle, 0.0);
  REQUIRE_THAT(cap, Catch::Matchers::WithinAbs(1.0 / 5.0, 1e-12));
  auto eff = effective_schedule(ex);
  REQUIRE(eff.scale == cap);  // scale 0 requested the cap

  ex.schedule = Schedule::strongly_convex_regime(0.2, 123.0);
  REQUIRE(effective_schedule(ex).scale == cap);  // clamped
  ex.schedule = Schedule::strongly_convex_regime(0.2, 0.01);
  REQUIRE(effective_schedule(ex).scale == 0.01);  // under the cap: honored

  ex.beta = 0.5;
  ex.schedule = Schedule::strongly_convex_regime(0.2);
  REQUIRE_THAT(effective_schedule(ex).scale, Catch::Matchers::WithinAbs(0.1, 1e-12));

  // custom schedules are never rescaled
  ex.schedule = Schedule::constant(100.0);
  REQUIRE(effective_schedule(ex).scale == 100.0);
}

TEST_CASE("noiseless constant-step run: f_gap non-increasing along the grid") {
  auto ex = base_experiment();
  ex.oracle = std::make_shared<const GradientOracle>(ex.problem, AdditiveGaussianNoise{0.0});
  ex.schedule = Schedule::constant(1.0 / ex.problem->smoothness_L);
  ex.horizon = 5000;
  auto rec = run_trajectory(ex, 0);
  REQUIRE_FALSE(rec.diverged);
  REQUIRE(rec.sample_grid.front() == 1);
  REQUIRE(rec.sample_grid.back() == ex.horizon);
  for (std::size_t i = 1; i < rec.f_gap.size(); ++i)
    REQUIRE(rec.f_gap[i] <= rec.f_gap[i - 1] + 1e-12);
}

TEST_CASE("same (master_seed, seed_index) reproduces the record bitwise") {
  auto ex = base_experiment();
  auto a = run_trajectory(ex, 2);
  auto b = run_trajectory(ex, 2);
  REQUIRE(records_equal(a, b));
  // different seed index gives a different trajectory
  auto c = run_trajectory(ex, 3);
  REQUIRE_FALSE(a.f_gap == c.f_gap);
}

TEST_CASE("deliberate blow-up step size is caught by the divergence guard") {
  auto ex = base_experiment();
  ex.schedule = Schedule::constant(10.0 / ex.problem->strong_convexity_mu);
  ex.horizon = 100000;
  auto rec = run_trajectory(ex, 0);
  REQUIRE(rec.diverged);
  REQUIRE(rec.sample_grid.size() < 40);  // stopped well before the horizon
}

TEST_CASE("momentum diagnostics recorded for SHB") {
  auto ex = base_experiment();
  ex.method = Method::SHB;
  ex.beta = 0.5;
  ex.horizon = 2000;
  auto rec = run_trajectory(ex, 1);
  REQUIRE_FALSE(rec.diverged);
  REQUIRE(rec.v_norm_sq.size() == rec.sample_grid.size());
  REQUIRE(rec.v_norm_sq.front() == 0.0);  // v_1 = 0
  REQUIRE(rec.z_gap.front() == rec.f_gap.front());  // z_1 = x_1
  bool some_motion = false;
  for (double v : rec.v_norm_sq) some_motion = some_motion || v > 0.0;
  REQUIRE(some_motion);
}

TEST_CASE("weighted-average diagnostic dominates the running min on the grid") {
  auto ex = base_experiment();
  ex.problem = std::make_shared<const ProblemInstance>(make_smooth_nonconvex(5, 3.0, 1));
  ex.oracle = std::make_shared<const GradientOracle>(ex.problem, AdditiveGaussianNoise{0.3});
  ex.schedule = Schedule::non_convex_regime(0.1);
  ex.horizon = 30000;
  auto rec = run_trajectory(ex, 0);
  REQUIRE_FALSE(rec.diverged);
  for (std::size_t i = 0; i < rec.sample_grid.size(); ++i) {
    REQUIRE(rec.grad_min[i] <= rec.y_weighted[i] + 1e-12);
    if (i > 0) REQUIRE(rec.grad_min[i] <= rec.grad_min[i - 1]);
  }
}

TEST_CASE("run_experiment: serial and 8-way parallel agree bitwise") {
  auto ex = base_experiment();
  ex.n_seeds = 8;
  ex.threads = 1;
  auto serial = run_experiment(ex);
  ex.threads = 8;
  auto parallel = run_experiment(ex);
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t s = 0; s < serial.records.size(); ++s)
    REQUIRE(records_equal(serial.records[s], parallel.records[s]));
  REQUIRE(serial.fits.size() == parallel.fits.size());
  for (std::size_t i = 0; i < serial.fits.size(); ++i) {
    REQUIRE(serial.fits[i].seed_index == parallel.fits[i].seed_index);
    REQUIRE(serial.fits[i].fit.exponent == parallel.fits[i].fit.exponent);
  }
}

TEST_CASE("run_experiment: single seed reduces to run_trajectory plus one fit") {
  auto ex = base_experiment();
  ex.n_seeds = 1;
  auto res = run_experiment(ex);
  REQUIRE(res.records.size() == 1);
  REQUIRE(res.fits.size() == 1);  // strongly convex regime fits f_gap only
  REQUIRE(res.fits[0].series == "f_gap");
  auto solo = run_trajectory(ex, 0);
  REQUIRE(records_equal(res.records[0], solo));
}

TEST_CASE("diverged seeds are excluded from fits but counted in the fraction") {
  auto ex = base_experiment();
  ex.schedule = Schedule::constant(10.0 / ex.problem->strong_convexity_mu);
  ex.n_seeds = 3;
  auto res = run_experiment(ex);
  REQUIRE(res.diverged_fraction == 1.0);
  REQUIRE(res.fits.empty());
}

TEST_CASE("x_init variants") {
  auto ex = base_experiment();
  ex.x_init = ZeroInit{};
  auto rec = run_trajectory(ex, 0);
  REQUIRE_FALSE(rec.diverged);
  ex.x_init = ExplicitInit{Eigen::VectorXd::Ones(6)};
  rec = run_trajectory(ex, 0);
  REQUIRE_FALSE(rec.diverged);
  ex.x_init = ExplicitInit{Eigen::VectorXd::Ones(3)};  // wrong dimension
  REQUIRE_THROWS_AS(run_trajectory(ex, 0), std::invalid_argument);
  ex.x_init = RandomBallInit{5.0};
  REQUIRE_THROWS_AS(run_trajectory(ex, 99), std::invalid_argument);  // seed out of range
}

TEST_CASE("record_iterates stores grid iterates only when asked") {
  auto ex = base_experiment();
  ex.horizon = 500;
  auto rec = run_trajectory(ex, 0);
  REQUIRE(rec.iterates.empty());
  ex.record_iterates = true;
  rec = run_trajectory(ex, 0);
  REQUIRE(rec.iterates.size() == rec.sample_grid.size());
}
