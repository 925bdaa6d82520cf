#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "campaign/errors.hpp"
#include "campaign/simulator.hpp"

using namespace campaign;
using namespace campaign::workload;

namespace {

TaskSpec task(std::string id, int cores, int gpus, double seconds, TaskKind kind = TaskKind::Generic) {
  return TaskSpec{std::move(id), kind, cores, gpus, false, FixedDuration{seconds}};
}

sim::SimConfig cluster(int nodes, int cores, int gpus, std::uint64_t seed = 1) {
  sim::SimConfig c;
  for (int i = 0; i < nodes; ++i) c.nodes.push_back({"n" + std::to_string(i), cores, gpus});
  c.seed = seed;
  return c;
}

const placement::TaskRecord& record(const sim::Trace& t, const std::string& id) {
  auto it = std::find_if(t.records.begin(), t.records.end(),
                         [&](const auto& r) { return r.task_id == id; });
  if (it == t.records.end()) throw std::runtime_error("missing record " + id);
  return *it;
}

// Oracle: per-node occupancy never exceeds capacity at any instant.
bool never_overcommitted(const sim::Trace& t, const std::vector<placement::NodeSpec>& nodes) {
  std::map<std::string, std::pair<int, int>> cap;
  for (const auto& n : nodes) cap[n.id] = {n.cores, n.gpus};
  std::vector<double> times;
  for (const auto& r : t.records) times.push_back(r.start);
  for (double x : times) {
    std::map<std::string, std::pair<int, int>> used;
    for (const auto& r : t.records)
      if (r.start <= x && x < r.end)
        for (const auto& g : r.grants) {
          used[g.node_id].first += g.cores;
          used[g.node_id].second += g.gpus;
        }
    for (const auto& [id, u] : used)
      if (u.first > cap[id].first || u.second > cap[id].second) return false;
  }
  return true;
}

Workflow random_workflow(std::mt19937_64& rng, const std::string& prefix, bool gpu, int cores_per_node) {
  Workflow wf;
  const int pipelines = 1 + static_cast<int>(rng() % 4);
  for (int p = 0; p < pipelines; ++p) {
    Pipeline pl{prefix + std::to_string(p), {}};
    const int stages = 1 + static_cast<int>(rng() % 3);
    for (int s = 0; s < stages; ++s) {
      Stage st{pl.id + "s" + std::to_string(s), {}};
      const int tasks = 1 + static_cast<int>(rng() % 6);
      for (int k = 0; k < tasks; ++k) {
        const double secs = 100.0 * static_cast<double>(1 + rng() % 10);
        const auto id = st.id + "t" + std::to_string(k);
        st.tasks.push_back(gpu ? task(id, 0, 1, secs, TaskKind::EsmacsSim)
                               : task(id, 1 + static_cast<int>(rng() % cores_per_node), 0, secs,
                                      TaskKind::TiesSim));
      }
      pl.stages.push_back(std::move(st));
    }
    wf.pipelines.push_back(std::move(pl));
  }
  return wf;
}

}  // namespace

TEST(Simulator, SingleTask) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s", {task("t", 2, 0, 50.0)}}}});
  const auto r = sim::run(wf, cluster(1, 4, 0));
  EXPECT_DOUBLE_EQ(r.metrics.makespan, 50.0);
  ASSERT_EQ(r.trace.records.size(), 1u);
  EXPECT_DOUBLE_EQ(r.trace.records[0].start, 0.0);
  EXPECT_DOUBLE_EQ(r.metrics.utilization.cores, 0.5);
  ASSERT_EQ(r.trace.events.size(), 2u);
  EXPECT_EQ(r.trace.events[0].type, sim::EventType::Start);
}

TEST(Simulator, StagesRunSequentially) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s1", {task("a", 1, 0, 10.0), task("b", 1, 0, 30.0)}},
                                {"s2", {task("c", 1, 0, 5.0)}}}});
  const auto r = sim::run(wf, cluster(1, 4, 0));
  EXPECT_DOUBLE_EQ(record(r.trace, "c").start, 30.0);
  EXPECT_DOUBLE_EQ(r.metrics.makespan, 35.0);
}

TEST(Simulator, SmallTasksBackfillAroundABlockedOne) {
  Workflow wf;
  wf.pipelines.push_back({"a", {{"s", {task("a1", 3, 0, 100.0)}}}});
  wf.pipelines.push_back({"b", {{"s", {task("b1", 4, 0, 10.0)}}}});
  wf.pipelines.push_back({"c", {{"s", {task("c1", 1, 0, 10.0)}}}});
  const auto r = sim::run(wf, cluster(1, 4, 0));
  EXPECT_DOUBLE_EQ(record(r.trace, "c1").start, 0.0);
  EXPECT_DOUBLE_EQ(record(r.trace, "b1").start, 100.0);
}

TEST(Simulator, GpuTasksHoldACompanionCore) {
  Workflow wf;
  Stage st{"s", {}};
  for (int i = 0; i < 4; ++i) st.tasks.push_back(task("g" + std::to_string(i), 0, 1, 10.0));
  wf.pipelines.push_back({"p", {st}});
  // 2 cores, 4 GPUs: companion cores limit concurrency to 2.
  const auto r = sim::run(wf, cluster(1, 2, 4));
  EXPECT_DOUBLE_EQ(r.metrics.makespan, 20.0);
  for (const auto& rec : r.trace.records) EXPECT_EQ(rec.total_cores(), 1);
}

TEST(Simulator, UnschedulableTaskIsNamed) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s", {task("ok", 1, 0, 1.0), task("huge", 64, 0, 1.0)}}}});
  try {
    sim::run(wf, cluster(2, 32, 0));
    FAIL() << "expected UnschedulableError";
  } catch (const UnschedulableError& e) {
    EXPECT_EQ(e.task_id(), "huge");
  }
  Workflow g;
  g.pipelines.push_back({"p", {{"s", {task("gpu", 0, 1, 1.0)}}}});
  EXPECT_THROW(sim::run(g, cluster(1, 8, 0)), UnschedulableError);
}

TEST(Simulator, InvalidWorkflowIsInputError) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s", {task("a", 1, 0, 1.0), task("a", 1, 0, 1.0)}}}});
  EXPECT_THROW(sim::run(wf, cluster(1, 4, 0)), InputError);
}

TEST(Simulator, DeterministicForAFixedSeed) {
  std::mt19937_64 rng(8);
  auto wf = random_workflow(rng, "p", false, 8);
  for (auto& p : wf.pipelines)
    for (auto& s : p.stages)
      for (auto& t : s.tasks) t.duration = StochasticDuration{300.0, 0.2};
  const auto a = sim::run(wf, cluster(2, 8, 0, 99));
  const auto b = sim::run(wf, cluster(2, 8, 0, 99));
  const auto c = sim::run(wf, cluster(2, 8, 0, 100));
  std::ostringstream sa, sb, sc;
  sim::write_trace_csv(sa, a.trace);
  sim::write_trace_csv(sb, b.trace);
  sim::write_trace_csv(sc, c.trace);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Simulator, TaskDurationsDoNotDependOnOtherTasks) {
  Workflow one;
  one.pipelines.push_back({"p", {{"s", {task("x", 1, 0, 1.0)}}}});
  one.pipelines[0].stages[0].tasks[0].duration = StochasticDuration{100.0, 0.3};
  auto two = one;
  two.pipelines.push_back({"q", {{"s", {task("y", 1, 0, 1.0)}}}});
  two.pipelines[1].stages[0].tasks[0].duration = StochasticDuration{100.0, 0.3};
  const auto a = sim::run(one, cluster(1, 4, 0, 5));
  const auto b = sim::run(two, cluster(1, 4, 0, 5));
  const auto& ra = record(a.trace, "x");
  const auto& rb = record(b.trace, "x");
  EXPECT_DOUBLE_EQ(ra.end - ra.start, rb.end - rb.start);
}

TEST(Simulator, TraceCsvRoundTrips) {
  Workflow wf;
  TaskSpec span = task("span", 12, 0, 20.0, TaskKind::TiesSim);
  span.spannable = true;
  wf.pipelines.push_back({"p", {{"s", {span, task("g", 0, 2, 7.5, TaskKind::EsmacsSim)}}}});
  const auto r = sim::run(wf, cluster(2, 8, 2));
  std::stringstream s;
  sim::write_trace_csv(s, r.trace);
  const auto back = sim::read_trace_csv(s);
  ASSERT_EQ(back.records.size(), r.trace.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    EXPECT_EQ(back.records[i].task_id, r.trace.records[i].task_id);
    EXPECT_EQ(back.records[i].kind, r.trace.records[i].kind);
    EXPECT_EQ(back.records[i].start, r.trace.records[i].start);
    EXPECT_EQ(back.records[i].end, r.trace.records[i].end);
    EXPECT_EQ(back.records[i].grants, r.trace.records[i].grants);
  }
  std::stringstream again;
  sim::write_trace_csv(again, back);
  std::stringstream first;
  sim::write_trace_csv(first, r.trace);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Simulator, NodeHoursCountEveryTouchedNode) {
  Workflow wf;
  TaskSpec span = task("span", 12, 0, 3600.0, TaskKind::TiesSim);
  span.spannable = true;
  wf.pipelines.push_back({"p", {{"s", {span}}}});
  const auto r = sim::run(wf, cluster(2, 8, 0));
  EXPECT_DOUBLE_EQ(r.metrics.node_hours.at(TaskKind::TiesSim), 2.0);
  EXPECT_DOUBLE_EQ(r.metrics.node_hours.at(TaskKind::Docking), 0.0);
  EXPECT_EQ(r.metrics.node_hours.size(), std::size(kAllTaskKinds));
}

TEST(Simulator, HybridMergeFillsIdleCores) {
  Workflow gpu_heavy, cpu_heavy;
  Stage g{"g", {}}, c{"c", {}};
  for (int i = 0; i < 6; ++i) g.tasks.push_back(task("g" + std::to_string(i), 0, 1, 100.0));
  for (int i = 0; i < 3; ++i) c.tasks.push_back(task("c" + std::to_string(i), 10, 0, 100.0));
  gpu_heavy.pipelines.push_back({"esmacs", {g}});
  cpu_heavy.pipelines.push_back({"ties", {c}});
  const auto cmp = sim::compare_hybrid(gpu_heavy, cpu_heavy, cluster(1, 36, 6));
  EXPECT_DOUBLE_EQ(cmp.first.makespan, 100.0);
  EXPECT_DOUBLE_EQ(cmp.second.makespan, 100.0);
  EXPECT_DOUBLE_EQ(cmp.sequential.makespan, 200.0);
  EXPECT_DOUBLE_EQ(cmp.merged.makespan, 100.0);
  EXPECT_DOUBLE_EQ(cmp.merged.utilization.cores, 1.0);
}

// Property: with GPU work and CPU work on disjoint slots, merging never
// lengthens the schedule beyond running the two back to back, and no node is
// ever overcommitted.
TEST(Simulator, MergedNeverSlowerThanSequential) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const int cores = 8 + static_cast<int>(rng() % 24);
    const int gpus = 1 + static_cast<int>(rng() % 4);
    auto cfg = cluster(1 + static_cast<int>(rng() % 3), cores, gpus, seed);
    const auto w1 = random_workflow(rng, "e", true, cores);
    const auto w2 = random_workflow(rng, "t", false, cores - gpus);
    const auto cmp = sim::compare_hybrid(w1, w2, cfg);
    EXPECT_LE(cmp.merged.makespan, cmp.sequential.makespan + 1e-9) << "seed " << seed;
    const auto merged = sim::run(merge_workflows(w1, w2), cfg);
    EXPECT_TRUE(never_overcommitted(merged.trace, cfg.nodes)) << "seed " << seed;
  }
}

TEST(Simulator, MetricsAndSummaryWriters) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s", {task("t", 1, 0, 3600.0, TaskKind::Docking)}}}});
  const auto cfg = cluster(1, 2, 0);
  const auto r = sim::run(wf, cfg);
  std::ostringstream m, s;
  sim::write_metrics_csv(m, r.metrics);
  EXPECT_NE(m.str().find("makespan_s,3600\n"), std::string::npos);
  EXPECT_NE(m.str().find("node_hours_Docking,1\n"), std::string::npos);
  sim::write_summary(s, r.metrics, cfg, 1);
  EXPECT_NE(s.str().find("makespan [s]     3600"), std::string::npos);
}

TEST(Simulator, SerialAndParallelPairs) {
  Workflow wf;
  wf.pipelines.push_back({"p", {{"s", {task("a", 1, 0, 10.0), task("b", 1, 0, 10.0)}}}});
  EXPECT_DOUBLE_EQ(sim::run(wf, cluster(1, 1, 0)).metrics.makespan, 20.0);
  EXPECT_DOUBLE_EQ(sim::run(wf, cluster(1, 2, 0)).metrics.makespan, 10.0);
}

TEST(Simulator, NodeHoursExamples) {
  sim::Trace t;
  const auto empty = sim::node_hours(t);
  EXPECT_TRUE(std::all_of(empty.begin(), empty.end(),
                          [](const auto& kv) { return kv.second == 0.0; }));
  t.records.push_back({"x", TaskKind::TiesSim, 0.0, 1800.0, {{"n0", 2, 0}, {"n1", 1, 0}}});
  EXPECT_DOUBLE_EQ(sim::node_hours(t).at(TaskKind::TiesSim), 1.0);
}

TEST(Simulator, HybridIdentityAndForcedSerialization) {
  Workflow w1, empty;
  w1.pipelines.push_back({"a", {{"s", {task("a1", 4, 0, 30.0)}}}});
  const auto cfg = cluster(1, 4, 0);
  const auto id = sim::compare_hybrid(w1, empty, cfg);
  EXPECT_DOUBLE_EQ(id.merged.makespan, id.first.makespan);
  Workflow w2;
  w2.pipelines.push_back({"b", {{"s", {task("b1", 4, 0, 30.0)}}}});
  EXPECT_DOUBLE_EQ(sim::compare_hybrid(w1, w2, cfg).merged.makespan, 60.0);
}

TEST(Simulator, HybridDisjointTwoNodeExample) {
  Workflow gpu, cpu;
  gpu.pipelines.push_back({"g", {{"s", {task("g1", 0, 2, 50.0), task("g2", 0, 2, 50.0)}}}});
  cpu.pipelines.push_back({"c", {{"s", {task("c1", 6, 0, 80.0), task("c2", 6, 0, 80.0)}}}});
  // Each node: 8 cores, 2 GPUs. GPU tasks take 2 companion cores, leaving 6.
  const auto cmp = sim::compare_hybrid(gpu, cpu, cluster(2, 8, 2));
  EXPECT_DOUBLE_EQ(cmp.first.makespan, 50.0);
  EXPECT_DOUBLE_EQ(cmp.second.makespan, 80.0);
  EXPECT_DOUBLE_EQ(cmp.merged.makespan, 80.0);
}
