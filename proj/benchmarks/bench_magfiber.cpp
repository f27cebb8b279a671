#include <benchmark/benchmark.h>

#include <numbers>

#include "magfiber/analysis.hpp"
#include "magfiber/lattice.hpp"
#include "magfiber/models.hpp"

using namespace magfiber;

namespace {

constexpr double kPi = std::numbers::pi;

Discretization box(double h, double L) {
  Discretization d;
  d.h1 = d.h2 = h;
  d.L1 = d.L2 = L;
  return d;
}

void BM_Assemble2D(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const SigmaSolver solver(ModelParams{kPi / 2.0, kPi / 4.0, -0.5}, box(h, 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(solver.assemble(0.3));
  state.counters["nodes"] = static_cast<double>(solver.grid().node_count());
}
BENCHMARK(BM_Assemble2D)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SigmaShiftInvert(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const SigmaSolver solver(ModelParams{kPi / 2.0, kPi / 4.0, -0.5}, box(h, 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0.3).value);
  state.counters["nodes"] = static_cast<double>(solver.grid().node_count());
}
BENCHMARK(BM_SigmaShiftInvert)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SigmaWarmStart(benchmark::State& state) {
  const SigmaSolver solver(ModelParams{kPi / 2.0, kPi / 4.0, -0.5}, box(0.1, 10.0));
  const auto prev = solver.solve(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0.31, &prev.eig.vectors[0], prev.value).value);
}
BENCHMARK(BM_SigmaWarmStart)->Unit(benchmark::kMillisecond);

void BM_FiberBand(benchmark::State& state) {
  Discretization d;
  d.h_1d = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mu_a_value(-0.5, 0.7, d));
}
BENCHMARK(BM_FiberBand)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_BandTable(benchmark::State& state) {
  Discretization d;
  d.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(band_table(-0.5, -10.0, 10.0, 200, d));
}
BENCHMARK(BM_BandTable)->Unit(benchmark::kMillisecond);

void BM_SigmaEss(benchmark::State& state) {
  Discretization d;
  d.jobs = 1;
  const auto table = band_table(-0.5, kBandXiLo, kBandXiHi, kBandSteps, d);
  const ModelParams p{kPi / 2.0, kPi / 4.0, -0.5};
  double tau = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigma_ess(p, tau, table));
    tau = tau > 4.0 ? -4.0 : tau + 0.37;
  }
}
BENCHMARK(BM_SigmaEss)->Unit(benchmark::kMicrosecond);

void BM_DenseOracle(benchmark::State& state) {
  const Grid1D g(-8.0, 8.0, static_cast<int>(state.range(0)));
  const auto op = assemble_1d(g, ScalarField::sample(g, [](double t) { return t * t; }), Boundary::Dirichlet,
                              Boundary::Dirichlet);
  for (auto _ : state) benchmark::DoNotOptimize(dense_oracle_eigs(op.matrix));
}
BENCHMARK(BM_DenseOracle)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
