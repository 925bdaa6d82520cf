#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace campaign::workload {

enum class TaskKind {
  Docking,
  EsmacsSim,
  EsmacsAnalysis,
  TiesSim,
  TiesAnalysis,
  SurrogateTrain,
  Generic,
};

inline constexpr TaskKind kAllTaskKinds[] = {
    TaskKind::Docking,      TaskKind::EsmacsSim,      TaskKind::EsmacsAnalysis,
    TaskKind::TiesSim,      TaskKind::TiesAnalysis,   TaskKind::SurrogateTrain,
    TaskKind::Generic,
};

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

struct FixedDuration {
  double seconds = 1.0;
};

/// Normal(mean, relative_spread * mean) truncated at zero.
struct StochasticDuration {
  double mean_seconds = 1.0;
  double relative_spread = 0.0;
};

using Duration = std::variant<FixedDuration, StochasticDuration>;

/// Draws a strictly positive wall-clock duration.
double sample_duration(const Duration& d, std::mt19937_64& rng);

struct TaskSpec {
  std::string id;
  TaskKind kind = TaskKind::Generic;
  int cores = 1;
  int gpus = 0;
  bool spannable = false;
  Duration duration = FixedDuration{};
};

struct Stage {
  std::string id;
  std::vector<TaskSpec> tasks;
};

/// Stages run strictly in order; stage i+1 starts once every task of stage i
/// has completed.
struct Pipeline {
  std::string id;
  std::vector<Stage> stages;
};

/// Pipelines are mutually concurrent.
struct Workflow {
  std::vector<Pipeline> pipelines;

  std::size_t task_count() const;
  bool empty() const { return pipelines.empty(); }
};

struct CompletionState {
  std::set<std::string> done;
  std::set<std::string> running;
};

enum class ViolationKind {
  DuplicateTaskId,
  EmptyPipeline,
  EmptyStage,
  ZeroResourceTask,
  NegativeResources,
  SpannableGpuTask,
  NonPositiveDuration,
  NegativeSpread,
};

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending task, stage or pipeline id
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

ValidationReport validate_workflow(const Workflow& wf);

/// Tasks that may start now: not done or running, in the earliest stage of
/// their pipeline that still has incomplete work, with all earlier stages
/// done. Returned in workflow order (pipeline, stage, task position).
///
/// Throws InputError if the completion state names a task that is not part
/// of the workflow or lists a task as both done and running.
std::vector<TaskSpec> ready_tasks(const Workflow& wf, const CompletionState& cs);

/// Union of both workflows' pipelines (w1's first). No ordering is introduced
/// between pipelines of different inputs. Throws InputError on any task id
/// shared between the two.
Workflow merge_workflows(const Workflow& w1, const Workflow& w2);

}  // namespace campaign::workload
