#include <benchmark/benchmark.h>

#include "homog/cell_geometry.hpp"
#include "homog/cell_problems.hpp"
#include "homog/effective_tensors.hpp"
#include "homog/macro_solver.hpp"

using namespace homog;

static void BM_CorrectorSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const UnitCell cell = build_cell({InclusionShape{{0.5, 0.5}}, 2, n, 0.1, 0.01});
  for (auto _ : state) benchmark::DoNotOptimize(solve_corrector_oxygen(cell, 0));
}
BENCHMARK(BM_CorrectorSolve)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_EffectiveTensors(benchmark::State& state) {
  const UnitCell cell = build_cell({InclusionShape{{0.5, 0.5}}, 2, 64, 0.1, 0.01});
  for (auto _ : state) benchmark::DoNotOptimize(compute_effective_coefficients(cell));
}
BENCHMARK(BM_EffectiveTensors)->Unit(benchmark::kMillisecond);

static void BM_MacroSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  MacroProblem prob{BoxGrid({1.0, 1.0}, {n, n})};
  prob.coeffs.D_O = Eigen::MatrixXd::Identity(2, 2) * 0.6;
  prob.coeffs.D_plus = prob.coeffs.M_plus = prob.coeffs.D_O;
  prob.coeffs.eps = 0.06 * Eigen::MatrixXd::Identity(2, 2);
  prob.coeffs.porosity = 0.6;
  prob.coeffs.beta_O_bar = prob.coeffs.beta_plus_bar = 0.5;
  prob.bc.Phi_D_H = constant_field(0.2);
  prob.bc.Phi_D_O = constant_field(-0.3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_macro(prob));
}
BENCHMARK(BM_MacroSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
