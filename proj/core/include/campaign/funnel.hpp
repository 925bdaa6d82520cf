#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "campaign/free_energy.hpp"
#include "campaign/surrogate.hpp"
#include "campaign/workload.hpp"

namespace campaign::funnel {

struct CompoundRecord {
  std::string id;
  std::vector<double> features;
  std::optional<double> dock_score;  // lower is better
  std::optional<fe::EsmacsEstimate> esmacs;
  std::optional<double> true_affinity;  // hidden ground truth, synthetic pools only
};

struct FunnelConfig {
  std::size_t pool_size = 10000;
  std::size_t dock_keep = 100;
  std::size_t esmacs_keep = 10;
  std::size_t ties_pairs = 3;
  std::size_t iterations = 1;
  std::uint64_t seed = 0;
  std::size_t surrogate_k = 5;
  // Surrogate pre-selection: best exploit_factor x dock_keep compounds by
  // measured ESMACS dG where available and surrogate prediction otherwise, plus
  // explore_factor x dock_keep drawn uniformly from the remaining compounds
  // that have no ESMACS estimate yet.
  std::size_t exploit_factor = 4;
  std::size_t explore_factor = 1;
  std::size_t bootstrap_resamples = 1000;
  double ci_level = 0.95;

  /// Throws InputError unless pool_size >= dock_keep >= esmacs_keep >= 1,
  /// iterations >= 1 and ties_pairs < esmacs_keep (or ties_pairs == 0).
  void validate() const;
};

struct ScoredId {
  std::string id;
  double score = 0.0;
};

/// Ids of the n lowest scores, ties broken by id. Throws InputError when n
/// exceeds the list length.
std::vector<std::string> promote(std::span<const ScoredId> scored, std::size_t n);

/// Pearson product-moment correlation. Throws InputError for mismatched or
/// too-short inputs, SemanticError ("undefined correlation") when either
/// series has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Score and sample providers for each funnel fidelity. std::nullopt marks a
/// failed evaluation; the compound is flagged and dropped from that stage.
class FunnelOracles {
 public:
  virtual ~FunnelOracles() = default;

  virtual std::optional<double> dock(const CompoundRecord& c) const = 0;
  virtual std::optional<std::vector<fe::ReplicaSeries>> esmacs(const CompoundRecord& c) const = 0;
  virtual std::optional<std::vector<fe::LambdaWindow>> ties(const CompoundRecord& from,
                                                            const CompoundRecord& to) const = 0;
};

/// Smooth hidden affinity function on [0,1]^dim: a baseline minus a sum of
/// Gaussian wells.
class AffinityLandscape {
 public:
  struct Well {
    std::vector<double> center;
    double depth = 0.0;
    double width = 0.0;
  };

  AffinityLandscape(std::size_t dim, double baseline, std::vector<Well> wells);
  static AffinityLandscape random(std::size_t dim, std::uint64_t seed, std::size_t wells = 3);

  double operator()(std::span<const double> x) const;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
  double baseline_;
  std::vector<Well> wells_;
};

/// Uniform features in [0,1]^dim with true_affinity from the landscape. Ids
/// are zero-padded so lexicographic and numeric order agree.
std::vector<CompoundRecord> make_synthetic_pool(std::size_t size,
                                                const AffinityLandscape& landscape,
                                                std::uint64_t seed);

struct SyntheticOracleOptions {
  std::uint64_t seed = 0;
  double dock_slope = 1.0;
  double dock_offset = 0.0;
  double dock_noise = 1.5;
  std::size_t esmacs_replicas = 25;
  std::size_t esmacs_frames = 50;
  double esmacs_replica_sd = 1.5;  // ensemble mean noise = sd / sqrt(replicas)
  double esmacs_frame_sd = 1.0;
  std::size_t lambda_windows = 13;
  std::size_t ties_replicas = 5;
  std::size_t ties_samples = 20;
  double ties_replica_sd = 0.5;
  double ties_sample_sd = 1.0;
  double failure_rate = 0.0;  // per compound and stage
};

/// Deterministic oracles keyed to each compound's hidden true_affinity.
/// Every draw uses a stream derived from (seed, stage, compound id), so
/// results do not depend on evaluation order.
class SyntheticOracles final : public FunnelOracles {
 public:
  explicit SyntheticOracles(SyntheticOracleOptions opts = {}) : opts_(opts) {}

  std::optional<double> dock(const CompoundRecord& c) const override;
  std::optional<std::vector<fe::ReplicaSeries>> esmacs(const CompoundRecord& c) const override;
  std::optional<std::vector<fe::LambdaWindow>> ties(const CompoundRecord& from,
                                                    const CompoundRecord& to) const override;

  const SyntheticOracleOptions& options() const noexcept { return opts_; }

 private:
  bool fails(std::string_view stage, const std::string& id) const;

  SyntheticOracleOptions opts_;
};

/// Oracles backed by data files: docking scores from the pool's dock_score
/// column, ESMACS samples by compound id and TIES windows by transformation
/// id "<from>-<to>". Missing entries count as failures.
class FileOracles final : public FunnelOracles {
 public:
  FileOracles(std::vector<fe::CompoundSeries> esmacs,
              std::vector<fe::TransformationWindows> ties);

  std::optional<double> dock(const CompoundRecord& c) const override;
  std::optional<std::vector<fe::ReplicaSeries>> esmacs(const CompoundRecord& c) const override;
  std::optional<std::vector<fe::LambdaWindow>> ties(const CompoundRecord& from,
                                                    const CompoundRecord& to) const override;

 private:
  std::map<std::string, std::vector<fe::ReplicaSeries>> esmacs_;
  std::map<std::string, std::vector<fe::LambdaWindow>> ties_;
};

struct EsmacsResult {
  std::string compound_id;
  fe::EsmacsEstimate estimate;
  std::optional<double> dock_score;
  std::optional<double> true_affinity;
};

struct TiesResult {
  std::string from;
  std::string to;
  fe::TiesEstimate estimate;

  std::string label() const { return from + "-" + to; }
};

struct FlaggedCompound {
  std::string id;
  std::string stage;  // "dock", "esmacs" or "ties"
  std::string reason;
};

struct WorkloadStats {
  std::size_t docking_tasks = 0;
  std::size_t esmacs_simulations = 0;
  std::size_t ties_simulations = 0;
};

struct IterationReport {
  std::size_t iteration = 0;  // 1-based
  bool surrogate_used = false;
  std::size_t candidates = 0;
  std::vector<ScoredId> dock_scores;
  std::vector<std::string> dock_promoted;
  std::vector<EsmacsResult> esmacs;  // dock-promoted compounds, in rank order
  std::vector<std::string> esmacs_promoted;
  std::vector<TiesResult> ties;
  std::vector<FlaggedCompound> flagged;
  std::size_t training_set_size = 0;
  WorkloadStats workload;
  /// Mean hidden affinity of the dock-promoted set, when ground truth exists.
  std::optional<double> mean_true_affinity_promoted;
  /// Correlation of docking score with ESMACS dG over the promoted set.
  std::optional<double> dock_esmacs_correlation;
};

/// Multi-fidelity funnel with a surrogate feedback loop. Each iteration:
/// surrogate pre-selection (whole pool while untrained), docking of the
/// candidates and promotion of the best dock_keep, ESMACS estimates and
/// promotion of the best esmacs_keep, TIES over ties_pairs adjacent-rank
/// pairs, then retraining on the best dG available for every compound seen
/// so far (ESMACS where evaluated, docking score otherwise).
class FunnelCampaign {
 public:
  /// Throws InputError for an invalid config, an empty pool, mismatched
  /// feature lengths or duplicate ids. The default model is KnnSurrogate.
  FunnelCampaign(std::vector<CompoundRecord> pool, FunnelConfig cfg,
                 const FunnelOracles& oracles, std::unique_ptr<AffinityModel> model = nullptr);

  IterationReport run_iteration();
  std::vector<IterationReport> run_all();

  const std::vector<CompoundRecord>& pool() const noexcept { return pool_; }
  const AffinityModel& surrogate() const noexcept { return *model_; }
  std::vector<TrainingPoint> training_set() const;
  std::size_t iterations_run() const noexcept { return iteration_; }

 private:
  std::vector<std::size_t> select_candidates();

  std::vector<CompoundRecord> pool_;
  FunnelConfig cfg_;
  const FunnelOracles& oracles_;
  std::unique_ptr<AffinityModel> model_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, TrainingPoint> training_;
  std::size_t iteration_ = 0;
};

// --- Workflow generation --------------------------------------------------

/// Task shapes and durations for the simulation workload. Defaults spread
/// 10 node-hours per ESMACS complex over 25 GPU replicas and 700 node-hours
/// per TIES transformation over 65 CPU replicas.
struct CostModel {
  std::size_t esmacs_replicas = 25;
  int esmacs_sim_cores = 0;
  int esmacs_sim_gpus = 1;
  double esmacs_sim_seconds = 10.0 * 3600.0 / 25.0;
  int esmacs_analysis_cores = 1;
  double esmacs_analysis_seconds = 600.0;

  std::size_t ties_simulations = 65;  // 13 lambda windows x 5 replicas
  int ties_sim_cores = 32;
  bool ties_sim_spannable = true;
  double ties_sim_seconds = 700.0 * 3600.0 / 65.0;
  int ties_analysis_cores = 1;
  double ties_analysis_seconds = 1800.0;

  double relative_spread = 0.05;  // 0 gives fixed durations
};

/// One pipeline per ESMACS-evaluated compound (a stage of GPU replicas then
/// one analysis task) and one per TIES pair (a stage of CPU replicas then one
/// analysis task).
workload::Workflow emit_workflow(const IterationReport& report, const CostModel& cost = {});

// --- CSV surfaces ---------------------------------------------------------

/// Columns id,feature_0..feature_{d-1},dock_score,true_affinity; the last two
/// may be empty.
void write_pool_csv(std::ostream& out, std::span<const CompoundRecord> pool);
std::vector<CompoundRecord> read_pool_csv(std::istream& in);

/// ESMACS rows of one iteration:
/// compound_id,dock_score,dg_kcal_mol,ci_low,ci_high,replicas,promoted.
void write_iteration_csv(std::ostream& out, const IterationReport& report);
/// transformation_id,from,to,ddg_kcal_mol,sigma_kcal_mol,windows.
void write_iteration_ties_csv(std::ostream& out, const IterationReport& report);
/// compound_id,dock_score,esmacs_dg_kcal_mol,true_affinity for external plotting.
void write_scatter_csv(std::ostream& out, const IterationReport& report);
void write_iteration_summary(std::ostream& out, const IterationReport& report);

}  // namespace campaign::funnel
