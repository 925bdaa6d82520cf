#include "campaign/placement.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "campaign/errors.hpp"

namespace campaign::placement {

namespace {

int sum_cores(const std::vector<SlotGrant>& grants) {
  return std::accumulate(grants.begin(), grants.end(), 0,
                         [](int acc, const SlotGrant& g) { return acc + g.cores; });
}

int sum_gpus(const std::vector<SlotGrant>& grants) {
  return std::accumulate(grants.begin(), grants.end(), 0,
                         [](int acc, const SlotGrant& g) { return acc + g.gpus; });
}

}  // namespace

int Placement::total_cores() const { return sum_cores(grants); }
int Placement::total_gpus() const { return sum_gpus(grants); }
int TaskRecord::total_cores() const { return sum_cores(grants); }
int TaskRecord::total_gpus() const { return sum_gpus(grants); }

PlacementPolicy parse_policy(std::string_view name) {
  if (name == "first-fit" || name == "first_fit" || name == "FirstFit")
    return PlacementPolicy::FirstFit;
  throw InputError("unknown placement policy '" + std::string(name) + "'");
}

std::string_view to_string(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::FirstFit: return "first-fit";
  }
  return "first-fit";
}

int charged_cores(const workload::TaskSpec& task) { return task.cores + task.gpus; }

SlotLedger::SlotLedger(std::vector<NodeSpec> nodes) {
  if (nodes.empty()) throw InputError("node inventory is empty");
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.cores < 1) throw InputError("node '" + n.id + "' must have at least one core");
    if (n.gpus < 0) throw InputError("node '" + n.id + "' has a negative gpu count");
    if (i > 0 && nodes[i - 1].id == n.id)
      throw InputError("duplicate node id '" + n.id + "'");
    nodes_.push_back(NodeState{n, n.cores, n.gpus});
  }
}

std::optional<Placement> SlotLedger::try_place(const workload::TaskSpec& task,
                                               PlacementPolicy policy) {
  if (policy != PlacementPolicy::FirstFit) throw InputError("unsupported placement policy");
  if (held_.contains(task.id))
    throw LedgerFault("task '" + task.id + "' already holds a placement");
  if (task.cores < 0 || task.gpus < 0 || (task.cores == 0 && task.gpus == 0))
    return std::nullopt;

  const int need_cores = charged_cores(task);
  Placement p{task.id, {}};

  for (auto& n : nodes_) {
    if (n.free_cores >= need_cores && n.free_gpus >= task.gpus) {
      p.grants.push_back(SlotGrant{n.spec.id, need_cores, task.gpus});
      break;
    }
  }

  if (p.grants.empty() && task.spannable && task.gpus == 0) {
    int available = 0;
    for (const auto& n : nodes_) available += n.free_cores;
    if (available < need_cores) return std::nullopt;
    int remaining = need_cores;
    for (auto& n : nodes_) {
      if (remaining == 0) break;
      int take = std::min(n.free_cores, remaining);
      if (take == 0) continue;
      p.grants.push_back(SlotGrant{n.spec.id, take, 0});
      remaining -= take;
    }
  }

  if (p.grants.empty()) return std::nullopt;

  for (const auto& g : p.grants) {
    auto& n = nodes_[index_of(g.node_id)];
    n.free_cores -= g.cores;
    n.free_gpus -= g.gpus;
  }
  held_.emplace(task.id, p);
  return p;
}

void SlotLedger::release(const Placement& p) {
  auto it = held_.find(p.task_id);
  if (it == held_.end())
    throw LedgerFault("release of unknown or already released placement for '" +
                      p.task_id + "'");
  if (!(it->second == p))
    throw LedgerFault("placement for '" + p.task_id + "' does not match the recorded grant");
  for (const auto& g : p.grants) {
    auto& n = nodes_[index_of(g.node_id)];
    n.free_cores += g.cores;
    n.free_gpus += g.gpus;
  }
  held_.erase(it);
}

bool SlotLedger::fits_when_empty(const workload::TaskSpec& task) const {
  if (task.cores < 0 || task.gpus < 0 || (task.cores == 0 && task.gpus == 0)) return false;
  const int need_cores = charged_cores(task);
  for (const auto& n : nodes_)
    if (n.spec.cores >= need_cores && n.spec.gpus >= task.gpus) return true;
  return task.spannable && task.gpus == 0 && total_cores() >= need_cores;
}

std::size_t SlotLedger::index_of(const std::string& node_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node_id,
                             [](const NodeState& n, const std::string& id) {
                               return n.spec.id < id;
                             });
  if (it == nodes_.end() || it->spec.id != node_id)
    throw LedgerFault("unknown node '" + node_id + "'");
  return static_cast<std::size_t>(it - nodes_.begin());
}

int SlotLedger::total_cores() const {
  int n = 0;
  for (const auto& s : nodes_) n += s.spec.cores;
  return n;
}

int SlotLedger::total_gpus() const {
  int n = 0;
  for (const auto& s : nodes_) n += s.spec.gpus;
  return n;
}

int SlotLedger::free_cores() const {
  int n = 0;
  for (const auto& s : nodes_) n += s.free_cores;
  return n;
}

int SlotLedger::free_gpus() const {
  int n = 0;
  for (const auto& s : nodes_) n += s.free_gpus;
  return n;
}

bool SlotLedger::consistent() const {
  std::vector<int> held_cores(nodes_.size(), 0), held_gpus(nodes_.size(), 0);
  for (const auto& [id, p] : held_) {
    for (const auto& g : p.grants) {
      auto it = std::find_if(nodes_.begin(), nodes_.end(),
                             [&](const NodeState& n) { return n.spec.id == g.node_id; });
      if (it == nodes_.end()) return false;
      auto i = static_cast<std::size_t>(it - nodes_.begin());
      held_cores[i] += g.cores;
      held_gpus[i] += g.gpus;
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.free_cores < 0 || n.free_cores > n.spec.cores) return false;
    if (n.free_gpus < 0 || n.free_gpus > n.spec.gpus) return false;
    if (held_cores[i] + n.free_cores != n.spec.cores) return false;
    if (held_gpus[i] + n.free_gpus != n.spec.gpus) return false;
  }
  return true;
}

bool operator==(const SlotLedger& a, const SlotLedger& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (x.spec.id != y.spec.id || x.spec.cores != y.spec.cores ||
        x.spec.gpus != y.spec.gpus || x.free_cores != y.free_cores ||
        x.free_gpus != y.free_gpus)
      return false;
  }
  return a.held_ == b.held_;
}

namespace {

void check_trace_inputs(std::span<const TaskRecord> trace,
                        std::span<const NodeSpec> nodes, double horizon) {
  if (nodes.empty()) throw InputError("utilization: empty node list");
  if (!(horizon > 0.0)) throw InputError("utilization: horizon must be > 0");
  for (const auto& r : trace) {
    if (r.start < 0.0 || r.end > horizon || r.end < r.start)
      throw InputError("utilization: record '" + r.task_id + "' outside [0, horizon]");
  }
}

}  // namespace

Utilization utilization(std::span<const TaskRecord> trace,
                        std::span<const NodeSpec> nodes, double horizon) {
  check_trace_inputs(trace, nodes, horizon);
  double core_capacity = 0.0, gpu_capacity = 0.0;
  for (const auto& n : nodes) {
    core_capacity += n.cores;
    gpu_capacity += n.gpus;
  }
  double core_busy = 0.0, gpu_busy = 0.0;
  for (const auto& r : trace) {
    const double dt = r.end - r.start;
    core_busy += dt * r.total_cores();
    gpu_busy += dt * r.total_gpus();
  }
  Utilization u;
  u.cores = std::clamp(core_busy / (core_capacity * horizon), 0.0, 1.0);
  u.gpus = gpu_capacity > 0.0 ? std::clamp(gpu_busy / (gpu_capacity * horizon), 0.0, 1.0)
                              : 0.0;
  return u;
}

std::vector<NodeUtilization> per_node_utilization(std::span<const TaskRecord> trace,
                                                  std::span<const NodeSpec> nodes,
                                                  double horizon) {
  check_trace_inputs(trace, nodes, horizon);
  std::vector<NodeUtilization> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) {
    double core_busy = 0.0, gpu_busy = 0.0;
    for (const auto& r : trace) {
      for (const auto& g : r.grants) {
        if (g.node_id != n.id) continue;
        core_busy += (r.end - r.start) * g.cores;
        gpu_busy += (r.end - r.start) * g.gpus;
      }
    }
    Utilization u;
    u.cores = std::clamp(core_busy / (n.cores * horizon), 0.0, 1.0);
    u.gpus = n.gpus > 0 ? std::clamp(gpu_busy / (n.gpus * horizon), 0.0, 1.0) : 0.0;
    out.push_back(NodeUtilization{n.id, u});
  }
  return out;
}

}  // namespace campaign::placement
