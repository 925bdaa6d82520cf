#include "campaign/simulator.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include "campaign/csv.hpp"
#include "campaign/errors.hpp"
#include "campaign/rng.hpp"

namespace campaign::sim {

using placement::Placement;
using placement::SlotLedger;
using placement::TaskRecord;
using workload::TaskSpec;
using workload::Workflow;

namespace {

enum class TaskState { Pending, Running, Done };

struct FlatTask {
  const TaskSpec* spec = nullptr;
  std::size_t pipeline = 0;
  std::size_t stage = 0;
  TaskState state = TaskState::Pending;
  double start = 0.0;
  double end = 0.0;
  Placement placement;
};

struct PipelineCursor {
  std::size_t stage = 0;
  std::size_t remaining = 0;  // tasks of the current stage not yet done
  std::vector<std::vector<std::size_t>> stage_tasks;  // flat indices, sorted by id
};

struct Running {
  double end;
  const std::string* id;
  std::size_t flat;

  bool operator>(const Running& o) const {
    if (end != o.end) return end > o.end;
    return *id > *o.id;
  }
};

double horizon_of(const std::vector<TaskRecord>& records) {
  double h = 0.0;
  for (const auto& r : records) h = std::max(h, r.end);
  return h;
}

placement::Utilization safe_utilization(const std::vector<TaskRecord>& records,
                                        const std::vector<placement::NodeSpec>& nodes,
                                        double horizon) {
  if (!(horizon > 0.0)) return {};
  return placement::utilization(records, nodes, horizon);
}

}  // namespace

SimResult run(const Workflow& wf, const SimConfig& cfg) {
  auto report = workload::validate_workflow(wf);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw InputError("invalid workflow: " + v.subject + ": " + v.message);
  }
  SlotLedger ledger(cfg.nodes);

  std::vector<FlatTask> tasks;
  tasks.reserve(wf.task_count());
  std::vector<PipelineCursor> cursors(wf.pipelines.size());
  for (std::size_t p = 0; p < wf.pipelines.size(); ++p) {
    const auto& pipeline = wf.pipelines[p];
    auto& cur = cursors[p];
    cur.stage_tasks.resize(pipeline.stages.size());
    for (std::size_t s = 0; s < pipeline.stages.size(); ++s) {
      for (const auto& t : pipeline.stages[s].tasks) {
        cur.stage_tasks[s].push_back(tasks.size());
        tasks.push_back(FlatTask{&t, p, s, TaskState::Pending, 0.0, 0.0, {}});
      }
      std::sort(cur.stage_tasks[s].begin(), cur.stage_tasks[s].end(),
                [&](std::size_t a, std::size_t b) { return tasks[a].spec->id < tasks[b].spec->id; });
    }
    cur.remaining = cur.stage_tasks.empty() ? 0 : cur.stage_tasks[0].size();
  }

  // Pipelines scanned by (id, declaration index).
  std::vector<std::size_t> pipeline_order(wf.pipelines.size());
  std::iota(pipeline_order.begin(), pipeline_order.end(), 0);
  std::stable_sort(pipeline_order.begin(), pipeline_order.end(), [&](std::size_t a, std::size_t b) {
    return wf.pipelines[a].id < wf.pipelines[b].id;
  });

  for (auto p : pipeline_order)
    for (const auto& stage_list : cursors[p].stage_tasks)
      for (auto i : stage_list)
        if (!ledger.fits_when_empty(*tasks[i].spec))
          throw UnschedulableError(tasks[i].spec->id);

  Trace trace;
  std::priority_queue<Running, std::vector<Running>, std::greater<>> running;
  std::size_t done_count = 0;
  double now = 0.0;

  auto start_ready = [&] {
    for (auto p : pipeline_order) {
      auto& cur = cursors[p];
      if (cur.stage >= cur.stage_tasks.size()) continue;
      for (auto i : cur.stage_tasks[cur.stage]) {
        auto& t = tasks[i];
        if (t.state != TaskState::Pending) continue;
        auto granted = ledger.try_place(*t.spec, cfg.policy);
        if (!granted) continue;
        Rng rng(derive_seed(cfg.seed, t.spec->id));
        t.state = TaskState::Running;
        t.start = now;
        t.end = now + workload::sample_duration(t.spec->duration, rng);
        t.placement = std::move(*granted);
        running.push(Running{t.end, &t.spec->id, i});
        trace.events.push_back(TraceEvent{now, EventType::Start, t.spec->id});
      }
    }
  };

  start_ready();
  while (done_count < tasks.size()) {
    if (running.empty())
      throw SemanticError("simulation stalled with " +
                          std::to_string(tasks.size() - done_count) + " tasks pending");
    now = running.top().end;
    while (!running.empty() && running.top().end == now) {
      auto i = running.top().flat;
      running.pop();
      auto& t = tasks[i];
      ledger.release(t.placement);
      t.state = TaskState::Done;
      ++done_count;
      trace.events.push_back(TraceEvent{now, EventType::End, t.spec->id});
      trace.records.push_back(TaskRecord{t.spec->id, t.spec->kind, t.start, t.end,
                                         t.placement.grants});
      auto& cur = cursors[t.pipeline];
      if (--cur.remaining == 0) {
        ++cur.stage;
        if (cur.stage < cur.stage_tasks.size())
          cur.remaining = cur.stage_tasks[cur.stage].size();
      }
    }
    start_ready();
  }

  std::sort(trace.records.begin(), trace.records.end(),
            [](const TaskRecord& a, const TaskRecord& b) {
              return std::tie(a.start, a.task_id) < std::tie(b.start, b.task_id);
            });
  std::sort(trace.events.begin(), trace.events.end(),
            [](const TraceEvent& a, const TraceEvent& b) {
              return std::tie(a.time, a.type, a.task_id) < std::tie(b.time, b.type, b.task_id);
            });

  SimResult result;
  result.metrics.makespan = horizon_of(trace.records);
  result.metrics.utilization =
      safe_utilization(trace.records, cfg.nodes, result.metrics.makespan);
  result.metrics.node_hours = node_hours(trace);
  result.trace = std::move(trace);
  return result;
}

NodeHours node_hours(const Trace& trace) {
  NodeHours out;
  for (auto k : workload::kAllTaskKinds) out[k] = 0.0;
  for (const auto& r : trace.records) {
    std::set<std::string_view> distinct;
    for (const auto& g : r.grants) distinct.insert(g.node_id);
    out[r.kind] += static_cast<double>(distinct.size()) * (r.end - r.start) / 3600.0;
  }
  return out;
}

HybridComparison compare_hybrid(const Workflow& w1, const Workflow& w2,
                                const SimConfig& cfg) {
  auto merged_wf = workload::merge_workflows(w1, w2);
  auto r1 = run(w1, cfg);
  auto r2 = run(w2, cfg);
  auto rm = run(merged_wf, cfg);

  HybridComparison cmp;
  cmp.first = {r1.metrics.makespan, r1.metrics.utilization};
  cmp.second = {r2.metrics.makespan, r2.metrics.utilization};
  cmp.merged = {rm.metrics.makespan, rm.metrics.utilization};

  std::vector<TaskRecord> sequential = r1.trace.records;
  for (auto r : r2.trace.records) {
    r.start += r1.metrics.makespan;
    r.end += r1.metrics.makespan;
    sequential.push_back(std::move(r));
  }
  cmp.sequential.makespan = r1.metrics.makespan + r2.metrics.makespan;
  cmp.sequential.utilization =
      safe_utilization(sequential, cfg.nodes, horizon_of(sequential));
  return cmp;
}

namespace {

template <typename F>
std::string join(const std::vector<placement::SlotGrant>& grants, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < grants.size(); ++i) {
    if (i) out += ';';
    out += f(grants[i]);
  }
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  csv::Writer w(out);
  w.row({"task_id", "kind", "start_s", "end_s", "nodes", "cores", "gpus"});
  for (const auto& r : trace.records) {
    w.field(r.task_id)
        .field(workload::to_string(r.kind))
        .field(r.start)
        .field(r.end)
        .field(join(r.grants, [](const auto& g) { return g.node_id; }))
        .field(join(r.grants, [](const auto& g) { return std::to_string(g.cores); }))
        .field(join(r.grants, [](const auto& g) { return std::to_string(g.gpus); }));
    w.end_row();
  }
}

Trace read_trace_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_id = table.column("task_id"), c_kind = table.column("kind"),
             c_start = table.column("start_s"), c_end = table.column("end_s"),
             c_nodes = table.column("nodes"), c_cores = table.column("cores"),
             c_gpus = table.column("gpus");
  Trace trace;
  for (const auto& row : table.rows()) {
    TaskRecord r;
    r.task_id = row.fields[c_id];
    try {
      r.kind = workload::parse_task_kind(row.fields[c_kind]);
    } catch (const InputError& e) {
      throw ParseError(row.line, e.what());
    }
    r.start = csv::parse_double(row.fields[c_start], row.line);
    r.end = csv::parse_double(row.fields[c_end], row.line);
    auto nodes = csv::split(row.fields[c_nodes], ';');
    auto cores = csv::split(row.fields[c_cores], ';');
    auto gpus = csv::split(row.fields[c_gpus], ';');
    if (nodes.size() != cores.size() || nodes.size() != gpus.size())
      throw ParseError(row.line, "nodes/cores/gpus lists differ in length");
    for (std::size_t i = 0; i < nodes.size(); ++i)
      r.grants.push_back(placement::SlotGrant{
          nodes[i], static_cast<int>(csv::parse_int(cores[i], row.line)),
          static_cast<int>(csv::parse_int(gpus[i], row.line))});
    trace.events.push_back(TraceEvent{r.start, EventType::Start, r.task_id});
    trace.events.push_back(TraceEvent{r.end, EventType::End, r.task_id});
    trace.records.push_back(std::move(r));
  }
  std::sort(trace.events.begin(), trace.events.end(),
            [](const TraceEvent& a, const TraceEvent& b) {
              return std::tie(a.time, a.type, a.task_id) < std::tie(b.time, b.type, b.task_id);
            });
  return trace;
}

void write_utilization_csv(std::ostream& out,
                           const std::vector<placement::NodeUtilization>& rows) {
  csv::Writer w(out);
  w.row({"node_id", "core_util", "gpu_util"});
  for (const auto& r : rows) {
    w.field(r.node_id).field(r.util.cores).field(r.util.gpus);
    w.end_row();
  }
}

void write_metrics_csv(std::ostream& out, const SimMetrics& m) {
  csv::Writer w(out);
  w.row({"metric", "value"});
  w.field("makespan_s").field(m.makespan);
  w.end_row();
  w.field("core_util").field(m.utilization.cores);
  w.end_row();
  w.field("gpu_util").field(m.utilization.gpus);
  w.end_row();
  for (const auto& [kind, hours] : m.node_hours) {
    w.field("node_hours_" + std::string(workload::to_string(kind))).field(hours);
    w.end_row();
  }
}

void write_summary(std::ostream& out, const SimMetrics& m, const SimConfig& cfg,
                   std::size_t task_count) {
  int cores = 0, gpus = 0;
  for (const auto& n : cfg.nodes) {
    cores += n.cores;
    gpus += n.gpus;
  }
  out << "== simulation summary ==\n";
  out << "nodes            " << cfg.nodes.size() << " (" << cores << " cores, " << gpus
      << " gpus)\n";
  out << "policy           " << placement::to_string(cfg.policy) << '\n';
  out << "seed             " << cfg.seed << '\n';
  out << "tasks            " << task_count << '\n';
  out << "makespan [s]     " << csv::format_double(m.makespan) << '\n';
  out << "makespan [h]     " << csv::format_double(m.makespan / 3600.0) << '\n';
  out << "core utilization " << csv::format_double(m.utilization.cores) << '\n';
  out << "gpu utilization  " << csv::format_double(m.utilization.gpus) << '\n';
  out << "node-hours by kind:\n";
  for (const auto& [kind, hours] : m.node_hours)
    if (hours > 0.0) out << "  " << workload::to_string(kind) << ' ' << csv::format_double(hours) << '\n';
}

}  // namespace campaign::sim
