#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "campaign/workload.hpp"

namespace campaign::placement {

struct NodeSpec {
  std::string id;
  int cores = 1;
  int gpus = 0;
};

struct SlotGrant {
  std::string node_id;
  int cores = 0;
  int gpus = 0;

  friend bool operator==(const SlotGrant&, const SlotGrant&) = default;
};

/// A concrete grant of slots to one task. GPU tasks always receive one
/// companion core per GPU on the same node.
struct Placement {
  std::string task_id;
  std::vector<SlotGrant> grants;

  int total_cores() const;
  int total_gpus() const;

  friend bool operator==(const Placement&, const Placement&) = default;
};

enum class PlacementPolicy {
  /// Nodes scanned in ascending id order. Non-spannable tasks take the first
  /// node that fits; spannable CPU tasks take the first single node that fits
  /// and otherwise accumulate cores greedily across nodes in the same order.
  FirstFit,
};

PlacementPolicy parse_policy(std::string_view name);
std::string_view to_string(PlacementPolicy policy);

/// Cores a task is charged for: requested cores plus one per GPU.
int charged_cores(const workload::TaskSpec& task);

struct NodeState {
  NodeSpec spec;
  int free_cores = 0;
  int free_gpus = 0;
};

/// Per-node free/held slot accounting. Single writer; copies are cheap
/// read-only snapshots.
class SlotLedger {
 public:
  /// Nodes are kept in ascending id order. Throws InputError on an empty
  /// inventory, duplicate ids, cores < 1 or gpus < 0.
  explicit SlotLedger(std::vector<NodeSpec> nodes);

  /// Debits the ledger and returns the grant, or std::nullopt when the task
  /// does not fit right now (the ledger is left untouched). Throws
  /// LedgerFault if the task id already holds a placement.
  std::optional<Placement> try_place(const workload::TaskSpec& task,
                                     PlacementPolicy policy = PlacementPolicy::FirstFit);

  /// Returns every slot of a previously granted placement. Throws LedgerFault
  /// for unknown, already released or altered placements.
  void release(const Placement& p);

  /// Whether the task could be placed on this cluster when it is empty.
  bool fits_when_empty(const workload::TaskSpec& task) const;

  const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
  const std::map<std::string, Placement>& held() const noexcept { return held_; }

  int total_cores() const;
  int total_gpus() const;
  int free_cores() const;
  int free_gpus() const;

  /// Bounds and conservation: held + free == capacity on every node.
  bool consistent() const;

  friend bool operator==(const SlotLedger& a, const SlotLedger& b);

 private:
  std::size_t index_of(const std::string& node_id) const;

  std::vector<NodeState> nodes_;
  std::map<std::string, Placement> held_;
};

/// One executed task in a trace: when it ran and on which slots.
struct TaskRecord {
  std::string task_id;
  workload::TaskKind kind = workload::TaskKind::Generic;
  double start = 0.0;
  double end = 0.0;
  std::vector<SlotGrant> grants;

  int total_cores() const;
  int total_gpus() const;
};

struct Utilization {
  double cores = 0.0;
  double gpus = 0.0;
};

/// Busy slot-seconds over capacity x horizon, for the whole cluster. Throws
/// InputError for an empty node list, a non-positive horizon or records
/// outside [0, horizon].
Utilization utilization(std::span<const TaskRecord> trace,
                        std::span<const NodeSpec> nodes, double horizon);

struct NodeUtilization {
  std::string node_id;
  Utilization util;
};

/// Per-node breakdown of utilization(); GPU utilization of GPU-less nodes is 0.
std::vector<NodeUtilization> per_node_utilization(std::span<const TaskRecord> trace,
                                                  std::span<const NodeSpec> nodes,
                                                  double horizon);

}  // namespace campaign::placement
