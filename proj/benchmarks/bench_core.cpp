#include <benchmark/benchmark.h>

#include <random>

#include "fixtures.hpp"
#include "nrf/synthesis.hpp"

using namespace nrf;

namespace {

void BM_HinfNorm(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const Realization r = test::random_stable(rng, n, 3, 3, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(r, 4096));
}
BENCHMARK(BM_HinfNorm)->Arg(4)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Minimal(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const Realization a = test::random_stable(rng, n, 2, 2);
  const Realization r = a * Realization::identity(2) + a - a;
  for (auto _ : state) benchmark::DoNotOptimize(minimal(r).order());
}
BENCHMARK(BM_Minimal)->Arg(8)->Arg(24)->Arg(48)->Unit(benchmark::kMicrosecond);

void BM_BuildDcfGrid(benchmark::State& state) {
  const GridScenario g = test::surrogate_grid();
  const Matrix F = grid_block_diagonalizing_F(g), L = grid_deadbeat_L(g);
  for (auto _ : state) benchmark::DoNotOptimize(build_dcf(g.plant, F, L).bezout_residual);
}
BENCHMARK(BM_BuildDcfGrid)->Unit(benchmark::kMillisecond);

void BM_Parametrize(benchmark::State& state) {
  const test::GridDesign& s = test::shared_grid_design();
  const int q = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(parametrize(s.d, s.pat, q).size());
}
BENCHMARK(BM_Parametrize)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_RealizeDesign(benchmark::State& state) {
  const test::GridDesign& s = test::shared_grid_design();
  for (auto _ : state)
    benchmark::DoNotOptimize(realize_design(s.d, s.p, s.x, s.g.partition).maps.IQ.order());
}
BENCHMARK(BM_RealizeDesign)->Unit(benchmark::kMillisecond);

void BM_SimulateDistributed(benchmark::State& state) {
  const test::GridDesign& s = test::shared_grid_design();
  const int H = static_cast<int>(state.range(0));
  const ScenarioSignals sig = test::random_signals(s, H, 5);
  const Vector xc = Vector::Zero(s.g.plant.nx()), wc = Vector::Zero(s.Kw.order());
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_distributed(s.g.plant, s.bank, s.g.partition,
                                                  s.g.neighborhoods, sig, xc, wc)
                                 .x.data.sum());
  state.SetItemsProcessed(state.iterations() * H);
}
BENCHMARK(BM_SimulateDistributed)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SimulateMonolithic(benchmark::State& state) {
  const test::GridDesign& s = test::shared_grid_design();
  const int H = static_cast<int>(state.range(0));
  const ScenarioSignals sig = test::random_signals(s, H, 5);
  const Vector xc = Vector::Zero(s.g.plant.nx()), wc = Vector::Zero(s.Kw.order());
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_monolithic(s.g.plant, s.Kw, sig, xc, wc).x.data.sum());
  state.SetItemsProcessed(state.iterations() * H);
}
BENCHMARK(BM_SimulateMonolithic)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SampledNorms(benchmark::State& state) {
  const test::GridDesign& s = test::shared_grid_design();
  const SynthesisSpec spec = default_targets(s.g.partition, TargetMode::decouple_only);
  const Design des = realize_design(s.d, s.p, s.x, s.g.partition);
  const FrequencyGrid grid = FrequencyGrid::half_circle(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(objective(sampled_norms(des, spec, grid), spec));
}
BENCHMARK(BM_SampledNorms)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolveToy(benchmark::State& state) {
  Plant p;
  p.A = Matrix::Identity(2, 2) * 0.5;
  p.Bu = Matrix::Identity(2, 2);
  p.Bd = Matrix::Identity(2, 2);
  const AreaPartition part = AreaPartition::build({{1, 1}, {1, 1}});
  const DcfBundle d = build_dcf(p, -p.A, deadbeat_observer_gain(p, part));
  const QParametrization qp = parametrize(d, pattern_from_neighborhoods(part, {{0}, {1}}), 1);
  SynthesisSpec spec = default_targets(part, TargetMode::decouple_only);
  spec.bounds_mode = BoundsMode::none;
  for (auto _ : state) benchmark::DoNotOptimize(solve(spec, d, qp, part).objective);
}
BENCHMARK(BM_SolveToy)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
