#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "campaign/placement.hpp"
#include "campaign/workload.hpp"

namespace campaign::sim {

struct SimConfig {
  std::vector<placement::NodeSpec> nodes;
  std::uint64_t seed = 0;
  placement::PlacementPolicy policy = placement::PlacementPolicy::FirstFit;
};

enum class EventType { End, Start };

struct TraceEvent {
  double time = 0.0;
  EventType type = EventType::Start;
  std::string task_id;
};

struct Trace {
  /// One record per task, ordered by (start, task id).
  std::vector<placement::TaskRecord> records;
  /// Ordered by (time, End before Start, task id).
  std::vector<TraceEvent> events;
};

using NodeHours = std::map<workload::TaskKind, double>;

struct SimMetrics {
  double makespan = 0.0;
  placement::Utilization utilization;
  NodeHours node_hours;
};

struct SimResult {
  Trace trace;
  SimMetrics metrics;
};

/// Deterministic discrete-event execution of a workflow on a virtual
/// cluster. At each event time finished placements are released, the ready
/// set is recomputed and every ready task is offered for placement in
/// (pipeline id, stage index, task id) order; tasks that do not fit are
/// skipped so later ones may backfill. Durations come from per-task random
/// streams derived from the seed and the task id.
///
/// Throws InputError if the workflow fails validation or the node list is
/// invalid, UnschedulableError naming the first task that cannot fit on the
/// empty cluster.
SimResult run(const workload::Workflow& wf, const SimConfig& cfg);

/// Node-hours per task kind: distinct nodes touched x duration / 3600.
/// Every kind is present in the result, zero if unused.
NodeHours node_hours(const Trace& trace);

struct ScheduleSummary {
  double makespan = 0.0;
  placement::Utilization utilization;
};

struct HybridComparison {
  ScheduleSummary first;       // w1 alone
  ScheduleSummary second;      // w2 alone
  ScheduleSummary sequential;  // w1 then w2
  ScheduleSummary merged;      // merge_workflows(w1, w2)
};

HybridComparison compare_hybrid(const workload::Workflow& w1,
                                const workload::Workflow& w2, const SimConfig& cfg);

// CSV surfaces.

/// Columns: task_id,kind,start_s,end_s,nodes,cores,gpus. Multi-node grants
/// list node ids joined by ';' and per-node counts joined the same way.
void write_trace_csv(std::ostream& out, const Trace& trace);
/// Reads what write_trace_csv produced (records only; events are rebuilt).
Trace read_trace_csv(std::istream& in);

/// Columns: node_id,core_util,gpu_util.
void write_utilization_csv(std::ostream& out,
                           const std::vector<placement::NodeUtilization>& rows);

/// Columns: metric,value. Node-hours appear as node_hours_<Kind>.
void write_metrics_csv(std::ostream& out, const SimMetrics& metrics);

void write_summary(std::ostream& out, const SimMetrics& metrics,
                   const SimConfig& cfg, std::size_t task_count);

}  // namespace campaign::sim
