#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "epidiff/analysis.hpp"
#include "epidiff/model.hpp"
#include "epidiff/solver.hpp"

using namespace epidiff;

namespace {

// A trajectory whose snapshots are profile(x) * exp(-rho t): every weighted
// quadratic functional then decays at exactly 2 rho.
Trajectory synthetic_decay(int n_cells, double rho, double scale,
                           const std::function<double(double)>& profile) {
  Trajectory traj;
  traj.grid = Grid::build(n_cells);
  traj.form = "z_form";
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    std::vector<double> v(n_cells);
    for (int i = 0; i < n_cells; ++i)
      v[i] = scale * profile(traj.grid->centers[i]) * std::exp(-rho * t);
    traj.times.push_back(t);
    traj.snapshots.push_back(std::move(v));
  }
  return traj;
}

Trajectory constant_snapshots(std::shared_ptr<const Grid> grid,
                              const std::function<double(double)>& profile,
                              int n_snap, double dt) {
  Trajectory traj;
  traj.grid = grid;
  traj.form = "p_form";
  std::vector<double> v(grid->n_cells);
  for (int i = 0; i < grid->n_cells; ++i) v[i] = profile(grid->centers[i]);
  for (int k = 0; k < n_snap; ++k) {
    traj.times.push_back(k * dt);
    traj.snapshots.push_back(v);
  }
  return traj;
}

}  // namespace

TEST_CASE("decay-rate fit recovers a manufactured rate exactly") {
  const double rho = 1.7;
  Trajectory traj = synthetic_decay(100, rho, 1.0,
                                    [](double x) { return std::sin(3.14159 * x); });
  ModelParams p(1.0, 0.0);
  DecayReport rep = fit_decay_rate(traj, WeightKind::unity, p, 0.0, 1.0, RateBound::none);
  CHECK(rep.rate == doctest::Approx(2.0 * rho).epsilon(1e-12));
  CHECK(rep.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.bound == 0.0);
  CHECK(rep.bound_kind.empty());
  REQUIRE(rep.times.size() == 11);

  // The fitted rate is invariant under rescaling the initial data.
  Trajectory scaled = synthetic_decay(100, rho, 137.0,
                                      [](double x) { return std::sin(3.14159 * x); });
  DecayReport rep2 = fit_decay_rate(scaled, WeightKind::unity, p, 0.0, 1.0, RateBound::none);
  CHECK(rep2.rate == doctest::Approx(rep.rate).epsilon(1e-12));
}

TEST_CASE("decay-rate fit wires in the analytic rate bounds") {
  const double rho = 3.0;
  Trajectory traj = synthetic_decay(100, rho, 1.0, [](double x) { return x * (2.0 - x); });
  ModelParams p(1.0, 0.0);

  DecayReport hardy = fit_decay_rate(traj, WeightKind::unity, p, 0.0, 1.0,
                                     RateBound::hardy_rate);
  CHECK(hardy.bound_kind == "1/(4NA)");
  // A(R0=0, N=1) = 0.166747834400, so the bound is 1/(4 A).
  CHECK(hardy.bound == doctest::Approx(1.0 / (4.0 * 0.166747834400)).epsilon(1e-9));
  CHECK(hardy.rate_meets_bound);  // 6.0 >> 1.5

  DecayReport poi = fit_decay_rate(traj, WeightKind::unity, p, 0.0, 1.0,
                                   RateBound::poincare_rate);
  CHECK(poi.bound_kind == "1/(N C_P)");
  CHECK(poi.bound == doctest::Approx(1.0 / 0.659631678085).epsilon(1e-9));
  CHECK(poi.rate_meets_bound);
}

TEST_CASE("decay-rate fit rejects thin windows and vanishing norms") {
  const double rho = 1.0;
  Trajectory traj = synthetic_decay(50, rho, 1.0, [](double x) { return x; });
  ModelParams p(1.0, 0.0);
  CHECK_THROWS_AS(fit_decay_rate(traj, WeightKind::unity, p, 0.0, 0.35, RateBound::none),
                  std::invalid_argument);

  Trajectory zero = synthetic_decay(50, rho, 0.0, [](double x) { return x; });
  CHECK_THROWS_WITH_AS(
      static_cast<void>(fit_decay_rate(zero, WeightKind::unity, p, 0.0, 1.0, RateBound::none)),
      doctest::Contains("zero norm"), std::domain_error);
}

TEST_CASE("origin-scaling audit separates vanishing from concentrating data") {
  auto grid = Grid::build(500);

  // u = x: the near-origin quadratic mass scales like y^3 and the
  // extrapolated boundary value is exactly zero.
  Trajectory good = constant_snapshots(grid, [](double x) { return x; }, 3, 0.1);
  OriginScalingReport ok = origin_scaling_audit(good);
  CHECK(ok.pass);
  CHECK(ok.max_u0_squared == 0.0);
  CHECK(ok.min_slope > 2.5);
  REQUIRE(ok.entries.size() == 3);
  CHECK(ok.entries[1].t == doctest::Approx(0.1).epsilon(1e-14));

  // u = x^{-1/4}: quadratic mass scales like sqrt(y), which must be flagged.
  Trajectory bad = constant_snapshots(
      grid, [](double x) { return std::pow(x, -0.25); }, 3, 0.1);
  OriginScalingReport flagged = origin_scaling_audit(bad);
  CHECK_FALSE(flagged.pass);
  CHECK(flagged.min_slope < 0.7);
  CHECK(flagged.max_u0_squared > 1.0);
}

TEST_CASE("weak residual vanishes for zero and stationary states") {
  ModelParams p(10.0, 0.5);
  auto grid = Grid::build(1000);

  Trajectory zero = constant_snapshots(grid, [](double) { return 0.0; }, 3, 0.01);
  CHECK(weak_residual(zero, p).max_residual == 0.0);

  Trajectory stat = constant_snapshots(
      grid, [&](double x) { return stationary(x, 1.0, p); }, 3, 0.01);
  WeakResidualReport rep = weak_residual(stat, p);
  REQUIRE(rep.per_test.size() == 8);
  CHECK(rep.max_residual < 1e-5);  // pure spatial discretization error
}

TEST_CASE("weak residual validates snapshot spacing and count") {
  ModelParams p(10.0, 0.5);
  auto grid = Grid::build(50);
  Trajectory two = constant_snapshots(grid, [](double x) { return x; }, 2, 0.01);
  CHECK_THROWS_AS(weak_residual(two, p), std::invalid_argument);

  Trajectory skew = constant_snapshots(grid, [](double x) { return x; }, 3, 0.01);
  skew.times[2] = 0.05;
  CHECK_THROWS_AS(weak_residual(skew, p), std::invalid_argument);
}

TEST_CASE("concentration metrics on exactly integrable profiles") {
  auto grid = Grid::build(200, -1.0, 1.0);
  Trajectory traj = constant_snapshots(grid, [](double) { return 1.0; }, 2, 0.5);
  std::vector<ConcentrationEntry> m = concentration_metrics(traj, 0.05);
  REQUIRE(m.size() == 2);
  CHECK(m[0].mass == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m[0].first_abs_moment == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m[0].mass_fraction == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(m[1].t == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("local exponent recovers pure powers and flags bad windows") {
  auto grid = Grid::build(1000);
  Field p15 = Field::from_function(grid, [](double x) { return std::pow(x, 1.5); });
  CHECK(local_exponent(p15) == doctest::Approx(1.5).epsilon(1e-12));

  Field flat = Field::from_function(grid, [](double) { return 7.0; });
  CHECK(local_exponent(flat) == doctest::Approx(0.0).epsilon(1e-12));

  Field signed_field = Field::from_function(grid, [](double x) { return x - 0.01; });
  CHECK_THROWS_AS(local_exponent(signed_field), std::domain_error);
  CHECK_THROWS_AS(local_exponent(p15, 0.4, 0.4005), std::invalid_argument);
}

TEST_CASE("pointwise envelope audit: zero data passes trivially") {
  auto grid = Grid::build(100);
  Trajectory zero = constant_snapshots(grid, [](double) { return 0.0; }, 4, 0.1);
  ModelParams p(10.0, 0.5);
  PointwiseBoundReport rep = pointwise_bound_audit(zero, p);
  CHECK(rep.pass);
  CHECK(rep.max_ratio == 0.0);
  REQUIRE(rep.entries.size() == 4);
}

TEST_CASE("pointwise envelope audit holds along a dissipative run") {
  ModelParams p(10.0, 0.5);
  auto grid = Grid::build(400);
  Field z0 = Field::from_function(grid, [](double x) { return x * (2.0 - x); });
  EvolveConfig cfg;
  cfg.form = OperatorForm::z_form;
  cfg.dt = 1e-2;
  cfg.t_end = 1.0;
  cfg.snapshot_every = 20;
  Trajectory traj = evolve(z0, p, cfg);
  PointwiseBoundReport rep = pointwise_bound_audit(traj, p);
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.max_ratio <= 1.0 + rep.slack);
  CHECK(rep.pass);
}
