// Microbenchmarks for the hot paths: operator assembly, implicit stepping,
// tridiagonal solves, eigenvalue extraction, weight-table lookups, and the
// weighted norms that the decay fits evaluate per snapshot.

#include <benchmark/benchmark.h>

#include <cmath>

#include "epidiff/functionals.hpp"
#include "epidiff/grid.hpp"
#include "epidiff/model.hpp"
#include "epidiff/quadrature.hpp"
#include "epidiff/solver.hpp"
#include "epidiff/spectral.hpp"
#include "epidiff/tridiag.hpp"

using namespace epidiff;

namespace {

Field gaussian_field(const std::shared_ptr<const Grid>& grid, double mu, double sigma) {
  Field u = Field::from_function(grid, [&](double x) {
    const double d = (x - mu) / sigma;
    return std::exp(-0.5 * d * d);
  });
  const double m = total_mass(u);
  for (double& v : u.values) v /= m;
  return u;
}

void BM_AssembleOperator(benchmark::State& state) {
  const ModelParams p(200.0, 2.0);
  auto grid = Grid::build(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SpatialOperator op = assemble_operator(p, grid, OperatorForm::p_form);
    benchmark::DoNotOptimize(op.matrix.diag.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleOperator)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity();

void BM_BackwardEulerStep(benchmark::State& state) {
  const ModelParams p(200.0, 2.0);
  auto grid = Grid::build(static_cast<int>(state.range(0)));
  const SpatialOperator op = assemble_operator(p, grid, OperatorForm::p_form);
  Field u = gaussian_field(grid, 0.7, 0.1);
  for (auto _ : state) {
    u = step(u, op, 1e-3, TimeScheme::backward_euler);
    benchmark::DoNotOptimize(u.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BackwardEulerStep)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity();

void BM_ThomasSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tridiagonal a(n);
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) {
    a.diag[i] = 4.0;
    if (i > 0) a.sub[i] = -1.0;
    if (i < n - 1) a.sup[i] = -1.0;
    rhs[i] = std::sin(0.01 * i);
  }
  for (auto _ : state) {
    std::vector<double> x = thomas_solve(a, rhs);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ThomasSolve)->Arg(1000)->Arg(8000)->Arg(64000)->Complexity();

void BM_Eigensolve(benchmark::State& state) {
  const ModelParams p(100.0, 0.0);
  const int n_modes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SpectralBasis basis = eigensolve(p, n_modes, 50 * n_modes);
    benchmark::DoNotOptimize(basis.lambdas.data());
  }
}
BENCHMARK(BM_Eigensolve)->Arg(4)->Arg(8)->Arg(16);

void BM_WeightTableBuild(benchmark::State& state) {
  const ModelParams p(100.0, 2.0);
  for (auto _ : state) {
    WeightTable table([&](double x) { return big_f(x, p); }, 0.0, 1.0);
    benchmark::DoNotOptimize(table.cumulative_to(0.5));
  }
}
BENCHMARK(BM_WeightTableBuild);

void BM_WeightTableLookup(benchmark::State& state) {
  const ModelParams p(100.0, 2.0);
  const WeightTable table([&](double x) { return big_f(x, p); }, 0.0, 1.0);
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-6;
    if (x > 1.0) x -= 1.0;
    benchmark::DoNotOptimize(table.tail_to(x));
  }
}
BENCHMARK(BM_WeightTableLookup);

void BM_WeightedNorm(benchmark::State& state) {
  const ModelParams p(100.0, 0.0);
  auto grid = Grid::build(static_cast<int>(state.range(0)));
  const Field z = Field::from_function(grid, [](double x) { return x * (2.0 - x); });
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_norm(z, WeightKind::omega_inverse, p));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WeightedNorm)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
