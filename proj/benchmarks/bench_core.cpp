#include <benchmark/benchmark.h>

#include "battdiag/attribution.hpp"
#include "battdiag/feature_table.hpp"
#include "battdiag/gbdt.hpp"
#include "battdiag/synth.hpp"

namespace {

using namespace battdiag;

FleetSpec bench_spec(std::size_t vehicles) {
  FleetSpec spec;
  spec.n_vehicles = vehicles;
  spec.segments_per_vehicle = 10;
  return spec;
}

std::vector<LabeledFeatures> labeled(const SyntheticFleet& fleet) {
  std::vector<LabeledFeatures> out;
  for (const auto& row : extract_feature_rows(fleet.dataset)) {
    out.push_back({row.x, fleet.dataset.vehicle_labels.at(row.vehicle_id)});
  }
  return out;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const auto fleet = generate_fleet(bench_spec(20));
  const auto& seg = fleet.dataset.segments.front();
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(seg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractFeatures);

void BM_Train(benchmark::State& state) {
  const auto data = labeled(generate_fleet(bench_spec(static_cast<std::size_t>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(train(data));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_Train)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_TreeShap(benchmark::State& state) {
  const auto data = labeled(generate_fleet(bench_spec(30)));
  const auto model = train(data);
  std::vector<FeatureVector> background;
  for (const auto& d : data) background.push_back(d.x);
  background = subsample_background(background, static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree_shap(model, data[i++ % data.size()].x, background));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TreeShap)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
