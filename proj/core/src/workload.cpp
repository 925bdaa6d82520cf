#include "campaign/workload.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "campaign/errors.hpp"

namespace campaign::workload {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Docking: return "Docking";
    case TaskKind::EsmacsSim: return "EsmacsSim";
    case TaskKind::EsmacsAnalysis: return "EsmacsAnalysis";
    case TaskKind::TiesSim: return "TiesSim";
    case TaskKind::TiesAnalysis: return "TiesAnalysis";
    case TaskKind::SurrogateTrain: return "SurrogateTrain";
    case TaskKind::Generic: return "Generic";
  }
  return "Generic";
}

TaskKind parse_task_kind(std::string_view name) {
  for (auto k : kAllTaskKinds)
    if (to_string(k) == name) return k;
  throw InputError("unknown task kind '" + std::string(name) + "'");
}

double sample_duration(const Duration& d, std::mt19937_64& rng) {
  if (const auto* fixed = std::get_if<FixedDuration>(&d)) return fixed->seconds;
  const auto& s = std::get<StochasticDuration>(d);
  if (s.relative_spread <= 0.0) return s.mean_seconds;
  std::normal_distribution<double> dist(s.mean_seconds,
                                        s.relative_spread * s.mean_seconds);
  // Truncation at zero by rejection; bounded retries keep pathological
  // spreads from spinning.
  for (int attempt = 0; attempt < 64; ++attempt) {
    double x = dist(rng);
    if (x > 0.0) return x;
  }
  return s.mean_seconds;
}

std::size_t Workflow::task_count() const {
  std::size_t n = 0;
  for (const auto& p : pipelines)
    for (const auto& s : p.stages) n += s.tasks.size();
  return n;
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_workflow(const Workflow& wf) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, const std::string& subject, std::string msg) {
    report.violations.push_back(Violation{kind, subject, std::move(msg)});
  };

  std::unordered_set<std::string> seen;
  for (const auto& p : wf.pipelines) {
    if (p.stages.empty()) add(ViolationKind::EmptyPipeline, p.id, "pipeline has no stages");
    for (const auto& s : p.stages) {
      if (s.tasks.empty()) add(ViolationKind::EmptyStage, s.id, "stage has no tasks");
      for (const auto& t : s.tasks) {
        if (!seen.insert(t.id).second)
          add(ViolationKind::DuplicateTaskId, t.id, "duplicate task id");
        if (t.cores < 0 || t.gpus < 0)
          add(ViolationKind::NegativeResources, t.id, "negative resource count");
        else if (t.cores == 0 && t.gpus == 0)
          add(ViolationKind::ZeroResourceTask, t.id, "task requests no cores and no gpus");
        if (t.gpus > 0 && t.spannable)
          add(ViolationKind::SpannableGpuTask, t.id, "gpu task must bind to one node");
        std::visit(
            [&](const auto& d) {
              using D = std::decay_t<decltype(d)>;
              if constexpr (std::is_same_v<D, FixedDuration>) {
                if (!(d.seconds > 0.0))
                  add(ViolationKind::NonPositiveDuration, t.id, "duration must be > 0");
              } else {
                if (!(d.mean_seconds > 0.0))
                  add(ViolationKind::NonPositiveDuration, t.id, "mean duration must be > 0");
                if (!(d.relative_spread >= 0.0))
                  add(ViolationKind::NegativeSpread, t.id, "relative spread must be >= 0");
              }
            },
            t.duration);
      }
    }
  }
  return report;
}

std::vector<TaskSpec> ready_tasks(const Workflow& wf, const CompletionState& cs) {
  std::unordered_set<std::string_view> known;
  for (const auto& p : wf.pipelines)
    for (const auto& s : p.stages)
      for (const auto& t : s.tasks) known.insert(t.id);
  for (const auto& id : cs.done)
    if (!known.contains(id)) throw InputError("unknown task id in done set: '" + id + "'");
  for (const auto& id : cs.running) {
    if (!known.contains(id)) throw InputError("unknown task id in running set: '" + id + "'");
    if (cs.done.contains(id)) throw InputError("task '" + id + "' is both done and running");
  }

  std::vector<TaskSpec> ready;
  for (const auto& p : wf.pipelines) {
    for (const auto& s : p.stages) {
      bool stage_complete = true;
      for (const auto& t : s.tasks) {
        if (cs.done.contains(t.id)) continue;
        stage_complete = false;
        if (!cs.running.contains(t.id)) ready.push_back(t);
      }
      if (!stage_complete) break;
    }
  }
  return ready;
}

Workflow merge_workflows(const Workflow& w1, const Workflow& w2) {
  std::unordered_set<std::string_view> ids;
  for (const auto& p : w1.pipelines)
    for (const auto& s : p.stages)
      for (const auto& t : s.tasks) ids.insert(t.id);
  for (const auto& p : w2.pipelines)
    for (const auto& s : p.stages)
      for (const auto& t : s.tasks)
        if (ids.contains(t.id))
          throw InputError("task id collision while merging: '" + t.id + "'");

  Workflow merged = w1;
  merged.pipelines.insert(merged.pipelines.end(), w2.pipelines.begin(),
                          w2.pipelines.end());
  return merged;
}

}  // namespace campaign::workload
