#include <benchmark/benchmark.h>

#include <map>

#include "pbseg/binarize.hpp"
#include "pbseg/clustering.hpp"
#include "pbseg/geometry.hpp"
#include "pbseg/pipeline.hpp"
#include "pbseg/scene_synth.hpp"
#include "pbseg/spatial_index.hpp"

using namespace pbseg;

namespace {

// Scene with roughly `objects` objects at a moderate offset noise.
const SynthScene& scene(std::size_t objects) {
  static std::map<std::size_t, SynthScene> cache;
  auto it = cache.find(objects);
  if (it == cache.end()) {
    SceneConfig c;
    c.num_objects = objects;
    c.seed = 7;
    c.adjacency_probability = 0.3;
    SynthScene s = generate_scene(c);
    NoiseModel n;
    n.sigma = 0.02;
    n.seed = 8;
    apply_noise(s, n);
    it = cache.emplace(objects, std::move(s)).first;
  }
  return it->second;
}

void BM_BuildIndex(benchmark::State& state) {
  const auto shifted = apply_offsets(scene(static_cast<std::size_t>(state.range(0))).cloud);
  for (auto _ : state) benchmark::DoNotOptimize(SpatialIndex(shifted));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(shifted.size()));
}

void BM_Densities(benchmark::State& state) {
  const auto shifted = apply_offsets(scene(static_cast<std::size_t>(state.range(0))).cloud);
  const SpatialIndex index(shifted);
  for (auto _ : state) benchmark::DoNotOptimize(point_densities(index, kDefaultDensityRadius));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(shifted.size()));
}

void BM_GroupHps(benchmark::State& state) {
  const SynthScene& s = scene(static_cast<std::size_t>(state.range(0)));
  const auto shifted = apply_offsets(s.cloud);
  const auto labels = binarize(point_densities(shifted, kDefaultDensityRadius), kDefaultDensityThreshold);
  std::vector<std::uint8_t> mask(shifted.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = labels.high(i) ? 1 : 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_hps(shifted, mask, s.cloud.semantic, kDefaultDensityRadius));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(shifted.size()));
}

void BM_Segment(benchmark::State& state) {
  const SynthScene& s = scene(static_cast<std::size_t>(state.range(0)));
  PipelineConfig c;
  c.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(segment(s.cloud, s.catalog, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.cloud.size()));
}

}  // namespace

BENCHMARK(BM_BuildIndex)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Densities)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GroupHps)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Segment)->Args({10, 1})->Args({40, 1})->Args({40, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
