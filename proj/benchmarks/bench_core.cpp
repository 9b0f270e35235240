#include <benchmark/benchmark.h>

#include <random>

#include "vsa/delay_geometry.hpp"
#include "vsa/kernels.hpp"
#include "vsa/ks_model.hpp"
#include "vsa/sparse.hpp"

namespace {

vsa::FieldTrajectory noise(std::size_t N, std::size_t S) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> d(N * S);
  for (auto& x : d) x = g(rng);
  return vsa::FieldTrajectory(N, S, 0.25, 22.0, std::move(d));
}

void BM_DistanceBlock(benchmark::State& state) {
  const auto Q = static_cast<std::size_t>(state.range(0));
  const auto t = noise(600 + Q, 16);
  const auto win = vsa::trim_for_delays(t, Q);
  const std::size_t n = win.size();
  for (auto _ : state) {
    benchmark::DoNotOptimize(vsa::pairwise_sq_distance_block(win, 0, 256, 0, n).data());
  }
  state.SetItemsProcessed(std::int64_t(state.iterations() * 256 * n));
}
BENCHMARK(BM_DistanceBlock)->Arg(1)->Arg(15)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_KnnGraph(benchmark::State& state) {
  const auto t = noise(415, 16);
  const auto win = vsa::trim_for_delays(t, 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vsa::knn_graph(win, std::size_t(state.range(0)), 1).nnz());
  }
}
BENCHMARK(BM_KnnGraph)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Matvec(benchmark::State& state) {
  const auto t = noise(815, 16);
  const auto win = vsa::trim_for_delays(t, 15);
  const auto g = vsa::knn_graph(win, std::size_t(state.range(0)), 1);
  std::vector<double> x(g.n, 1.0), y(g.n);
  for (auto _ : state) {
    g.multiply(x, y, 1);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(std::int64_t(state.iterations() * g.nnz()));
}
BENCHMARK(BM_Matvec)->Arg(50)->Arg(200);

void BM_KsSample(benchmark::State& state) {
  vsa::KsConfig c;
  c.spinup = 0.0;
  c.samples = std::size_t(state.range(0));
  const auto u0 = vsa::ks_initial_state(c.points);
  for (auto _ : state) benchmark::DoNotOptimize(vsa::integrate_ks(c, u0).values().data());
  state.SetItemsProcessed(std::int64_t(state.iterations() * state.range(0)));
}
BENCHMARK(BM_KsSample)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
