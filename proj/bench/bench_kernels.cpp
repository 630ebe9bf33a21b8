// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "mvskit/evaluation.hpp"
#include "mvskit/geometry.hpp"
#include "mvskit/gpm.hpp"
#include "mvskit/mmd.hpp"
#include "mvskit/reference.hpp"
#include "mvskit/rng.hpp"
#include "mvskit/sweep.hpp"
#include "mvskit/synth.hpp"

namespace {

using namespace mvskit;

const SyntheticScene& scene(int size) {
  static std::map<int, SyntheticScene> cache;
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  SynthSpec spec;
  spec.width = spec.height = size;
  spec.views = 3;
  return cache.emplace(size, generate(spec)).first->second;
}

PointCloud random_cloud(Rng& rng, std::size_t n) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.positions.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
  return c;
}

EmbeddingSet random_set(Rng& rng, int n, int d, double offset) {
  EmbeddingSet s{Eigen::MatrixXd(n, d), "s"};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) s.vectors(i, j) = rng.normal() + offset;
  return s;
}

template <bool Parallel>
void BM_NnDistances(benchmark::State& state) {
  Rng rng(1);
  const PointCloud a = random_cloud(rng, state.range(0)), b = random_cloud(rng, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? nn_distances(a, b) : reference::nn_distances(a, b));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Warp(benchmark::State& state) {
  const SyntheticScene& sc = scene(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? warp_image(sc.views[1], sc.views[0], sc.gt_depths[0])
                                      : reference::warp_image(sc.views[1], sc.views[0], sc.gt_depths[0]));
  }
}

template <bool Parallel>
void BM_CostVolume(benchmark::State& state) {
  const SyntheticScene& sc = scene(static_cast<int>(state.range(0)));
  const std::vector<View> sources(sc.views.begin() + 1, sc.views.end());
  const auto hyps = DepthHypotheses::uniform(sc.depth_min, sc.depth_max, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? build_cost_volume(sc.views[0], sources, hyps, CostKind::kSSD, 5)
                                      : reference::build_cost_volume(sc.views[0], sources, hyps, CostKind::kSSD, 5));
  }
}

template <bool Parallel>
void BM_Propagate(benchmark::State& state) {
  const SyntheticScene& sc = scene(static_cast<int>(state.range(0)));
  const AffinityField aff = guidance_affinity(sc.views[0], 50.0);
  const Image& img = sc.views[1].image();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? propagate(img, aff) : reference::propagate(img, aff));
  }
}

template <bool Parallel>
void BM_Mmd(benchmark::State& state) {
  Rng rng(2);
  const int n = static_cast<int>(state.range(0));
  const EmbeddingSet x = random_set(rng, n, 64, 0.0), y = random_set(rng, n, 64, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? mmd_squared(x, y, 8.0) : reference::mmd_squared(x, y, 8.0));
  }
}

}  // namespace

BENCHMARK(BM_NnDistances<true>)->Name("nn_distances/parallel")->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NnDistances<false>)->Name("nn_distances/reference")->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Warp<true>)->Name("warp_image/parallel")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Warp<false>)->Name("warp_image/reference")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostVolume<true>)->Name("cost_volume/parallel")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostVolume<false>)->Name("cost_volume/reference")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Propagate<true>)->Name("propagate/parallel")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Propagate<false>)->Name("propagate/reference")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mmd<true>)->Name("mmd_squared/parallel")->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mmd<false>)->Name("mmd_squared/reference")->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
