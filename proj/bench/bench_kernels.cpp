// Serial vs parallel timings for the OpenMP kernels. The second benchmark
// argument selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "lowlying/arithmetic.hpp"
#include "lowlying/besseltransform.hpp"
#include "lowlying/density.hpp"
#include "lowlying/kuznetsov.hpp"

using namespace lowlying;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void BM_KloostermanColumn(benchmark::State& state) {
  const auto c_max = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(arithmetic::kloosterman_column(1, 7, c_max, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * c_max);
}
BENCHMARK(BM_KloostermanColumn)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_PrimeSieve(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(arithmetic::primes_up_to(state.range(0), exec_of(state)));
}
BENCHMARK(BM_PrimeSieve)->ArgsProduct({{10'000'000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BoundScan(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  std::vector<besseltransform::GridPoint> grid;
  for (double f : {0.125, 0.25, 0.5, 1.0}) grid.push_back({f * T, T});
  besseltransform::ScanOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(besseltransform::bound_scan(besseltransform::ScanKind::small_X, grid, opts));
  }
}
BENCHMARK(BM_BoundScan)->ArgsProduct({{21}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_GeometricSide(benchmark::State& state) {
  const auto H = kuznetsov::AdmissibleWeight::spectral(besseltransform::default_weight(static_cast<int>(state.range(0))));
  kuznetsov::GeometricOptions opts;
  opts.exec = exec_of(state);
  const kuznetsov::GeometricEngine engine(H, 97, opts);
  for (auto _ : state) benchmark::DoNotOptimize(engine.side(97, 1));
}
BENCHMARK(BM_GeometricSide)->ArgsProduct({{21, 41}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_PrimeTables(benchmark::State& state) {
  const auto w = besseltransform::default_weight(21);
  density::DensityOptions opts;
  opts.exec = exec_of(state);
  opts.prime_chunk = 64;
  for (auto _ : state) benchmark::DoNotOptimize(density::build_prime_tables(w, static_cast<double>(state.range(0)), opts));
}
BENCHMARK(BM_PrimeTables)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
