#include <benchmark/benchmark.h>

#include "campaign/funnel.hpp"
#include "campaign/simulator.hpp"

using namespace campaign;

static void BM_SimulateIteration(benchmark::State& state) {
  funnel::IterationReport r;
  for (int i = 0; i < state.range(0); ++i) r.esmacs.push_back({"c" + std::to_string(i), {}, {}, {}});
  for (int i = 0; i + 1 < 10; ++i) r.ties.push_back({"c" + std::to_string(i), "c" + std::to_string(i + 1), {}});
  const auto wf = funnel::emit_workflow(r);
  sim::SimConfig cfg;
  for (int i = 0; i < 4; ++i) cfg.nodes.push_back({"n" + std::to_string(i), 42, 6});
  cfg.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(wf, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(wf.task_count()));
}
BENCHMARK(BM_SimulateIteration)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
