#include <benchmark/benchmark.h>

#include <random>

#include "campaign/funnel.hpp"

using namespace campaign::funnel;

static void BM_KnnPredictPool(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pool = make_synthetic_pool(10000, AffinityLandscape::random(4, 1), 1);
  std::vector<TrainingPoint> training;
  for (std::size_t i = 0; i < n; ++i)
    training.push_back({pool[i].id, pool[i].features, *pool[i].true_affinity});
  const auto model = fit_surrogate(training, 5);
  for (auto _ : state) {
    double s = 0.0;
    for (const auto& c : pool) s += model.predict(c.features);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pool.size()));
}
BENCHMARK(BM_KnnPredictPool)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
