#include <benchmark/benchmark.h>

#include "campaign/transitions.hpp"

using namespace campaign::tc;

static void BM_ClassifyResidues(benchmark::State& state) {
  TransitionMatrix m{};
  for (std::size_t k = 0; k < kClassCount; ++k)
    for (std::size_t l = 0; l < kClassCount; ++l) m[k][l] = k == l ? 0.65 : 0.05;
  std::vector<ClassSequence> residues;
  for (int r = 0; r < state.range(0); ++r)
    residues.push_back(generate_markov_sequence(m, static_cast<ClassCode>(r % 8), 2000,
                                                static_cast<std::uint64_t>(r), static_cast<std::size_t>(r)));
  const MarkovPredictor predictor(100);
  for (auto _ : state) benchmark::DoNotOptimize(classify(residues, predictor, {100, 1500}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClassifyResidues)->Arg(10)->Arg(300)->Unit(benchmark::kMillisecond);
