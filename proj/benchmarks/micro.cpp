#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ccs/cascade.hpp"
#include "ccs/ransac.hpp"
#include "ccs/submodel.hpp"
#include "ccs/synthetic.hpp"

using namespace ccs;

namespace {

BinaryCode random_code(std::mt19937_64& rng) {
  BinaryCode c;
  c.words[0] = rng();
  c.words[1] = rng();
  return c;
}

// Random-code model shared across runs; building 100K points is far more
// expensive than any single benchmark iteration.
const SubModel& random_model(std::size_t n) {
  static std::vector<std::pair<std::size_t, SubModel>> cache;
  for (const auto& [size, model] : cache)
    if (size == n) return model;
  std::mt19937_64 rng(n);
  std::vector<PointRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].id = static_cast<std::uint32_t>(i);
    records[i].code = random_code(rng);
    for (auto& b : records[i].pq.indices)
      b = static_cast<std::uint8_t>(rng());
  }
  cache.emplace_back(n, SubModel::from_records(std::move(records), {}, 0, 0));
  return cache.back().second;
}

const synth::Scene& street_scene() {
  static const synth::Scene scene = [] {
    synth::SceneSpec spec;
    spec.seed = 7;
    spec.segments = 2;
    spec.points_per_segment = 10000;
    spec.queries = 4;
    spec.features_per_query = 600;
    spec.references_per_placemark = 2;
    spec.training_pool = 1024;
    return synth::gen_scene(spec);
  }();
  return scene;
}

void BM_Hamming(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const BinaryCode a = random_code(rng);
  const BinaryCode b = random_code(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hamming(a, b));
}
BENCHMARK(BM_Hamming);

void BM_CoarseLookup(benchmark::State& state) {
  const SubModel& model = random_model(state.range(0));
  std::mt19937_64 rng(2);
  std::vector<BinaryCode> queries(256);
  for (auto& q : queries) q = random_code(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coarse_lookup(model, queries[i++ % 256]));
  }
}
BENCHMARK(BM_CoarseLookup)->Arg(10000)->Arg(100000)->Arg(1000000);

void BM_AdcTable(benchmark::State& state) {
  const synth::Scene& scene = street_scene();
  const Descriptor q = scene.queries[0].features[0].descriptor;
  for (auto _ : state) benchmark::DoNotOptimize(scene.codebook.adc_table(q));
}
BENCHMARK(BM_AdcTable);

void BM_AdcDistance(benchmark::State& state) {
  const synth::Scene& scene = street_scene();
  const DistanceTable table =
      scene.codebook.adc_table(scene.queries[0].features[0].descriptor);
  const PQCode code = scene.models[0].point(0).pq;
  for (auto _ : state) benchmark::DoNotOptimize(adc_distance(table, code));
}
BENCHMARK(BM_AdcDistance);

void BM_Refine(benchmark::State& state) {
  const SubModel& model = random_model(100000);
  std::mt19937_64 rng(3);
  std::vector<BinaryCode> queries(64);
  std::vector<std::vector<std::uint32_t>> lists(64);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    queries[i] = random_code(rng);
    lists[i] = coarse_lookup(model, queries[i]);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ % queries.size();
    benchmark::DoNotOptimize(refine(model, queries[k], lists[k], 40));
  }
}
BENCHMARK(BM_Refine);

// Full cascade over one query image; arg is the early-stop count (0 = none).
void BM_PrioritizedMatch(benchmark::State& state) {
  const synth::Scene& scene = street_scene();
  const synth::SceneQuery& q = scene.queries[0];
  CascadeParams params;
  params.n_early = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(prioritized_match(
        scene.models[q.segment_id], q.features, scene.hash, scene.codebook,
        params));
  }
}
BENCHMARK(BM_PrioritizedMatch)->Arg(0)->Arg(100);

// Pose verification over a matched correspondence set. Arg 0 runs the
// adaptive sequential test, arg 1 the fixed 5000-iteration loop.
void BM_Ransac(benchmark::State& state) {
  const synth::Scene& scene = street_scene();
  const synth::SceneQuery& q = scene.queries[0];
  CascadeParams params;
  params.n_early = 100;
  const CorrespondenceSet set = prioritized_match(
      scene.models[q.segment_id], q.features, scene.hash, scene.codebook,
      params);
  RansacConfig cfg;
  cfg.seed = 5;
  if (state.range(0) == 1) {
    cfg.mode = RansacConfig::Mode::kFixedIterations;
    cfg.fixed_iterations = 5000;
  }
  for (auto _ : state) benchmark::DoNotOptimize(ransac_1m(set, cfg));
}
BENCHMARK(BM_Ransac)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
