#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace campaign::fe {

/// Gas constant times temperature at ~300 K, kcal/mol. Reproduces the
/// -10.98 / -9.61 / -8.24 kcal/mol thresholds for 10 nM / 100 nM / 1 uM.
inline constexpr double kDefaultRT = 0.59616;

struct BootstrapOptions {
  std::size_t resamples = 1000;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
};

// --- ESMACS-style ensemble aggregation ------------------------------------

/// Per-frame energies of one replica trajectory, kcal/mol. Any configurational
/// entropy contribution is expected to be pre-summed into the samples.
struct ReplicaSeries {
  std::string replica_id;
  std::vector<double> samples;
};

struct EsmacsEstimate {
  double dg = 0.0;       // mean of replica means
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicas = 0;
};

/// Ensemble mean of per-replica means with a percentile bootstrap interval
/// from resampling replicas with replacement. The result does not depend on
/// replica order. Throws EstimationError("ensemble required") for fewer than
/// two replicas, InputError for empty or non-finite series, fewer than 100
/// resamples or a ci_level outside (0, 1).
EsmacsEstimate esmacs_aggregate(std::span<const ReplicaSeries> replicas,
                                const BootstrapOptions& opts = {});

// --- TIES-style thermodynamic integration ---------------------------------

/// dU/dlambda samples at one coupling value, one vector per replica.
struct LambdaWindow {
  double lambda = 0.0;
  std::vector<std::vector<double>> replicas;
};

struct WindowMean {
  double lambda = 0.0;
  double mean = 0.0;  // mean of replica means
};

struct TiesEstimate {
  double ddg = 0.0;
  double sigma = 0.0;  // standard deviation of bootstrap integrals
  std::size_t windows = 0;
  std::vector<WindowMean> window_means;  // sorted by lambda
};

/// Trapezoidal integral of window means over lambda with a bootstrap error
/// (replicas resampled independently within each window). Window order is
/// irrelevant. Throws EstimationError("incomplete alchemical path") if
/// lambda 0 or 1 is missing, InputError for duplicate or out-of-range lambda,
/// fewer than two windows, windows with fewer than two replicas, or empty
/// replicas.
TiesEstimate ties_integrate(std::span<const LambdaWindow> windows,
                            const BootstrapOptions& opts = {});

/// Plain trapezoid over (lambda, value) points sorted by lambda.
double trapezoid(std::span<const WindowMean> points);

// --- Affinity conversions and binning -------------------------------------

/// K_D (molar) for a binding free energy: exp(dg / rt).
double dg_to_kd(double dg, double rt = kDefaultRT);
/// Binding free energy for a K_D (molar): rt * ln(kd). Throws InputError for
/// kd <= 0 or rt <= 0.
double kd_to_dg(double kd, double rt = kDefaultRT);

struct AffinityThresholds {
  double nm10 = -10.98;
  double nm100 = -9.61;
  double um1 = -8.24;
};

enum class AffinityBin {
  Below10nM,     // dg < -10.98
  From10To100nM, // -10.98 <= dg < -9.61
  From100nMTo1uM,// -9.61 <= dg < -8.24
  Weaker,        // dg >= -8.24
};

std::string_view label(AffinityBin bin);

AffinityBin classify_affinity(double dg, const AffinityThresholds& t = {});

struct AffinityCounts {
  std::size_t below_10nm = 0;
  std::size_t from_10_to_100nm = 0;
  std::size_t from_100nm_to_1um = 0;
  std::size_t weaker = 0;

  /// Everything with dg < -8.24.
  std::size_t total_below_1um() const {
    return below_10nm + from_10_to_100nm + from_100nm_to_1um;
  }
  friend bool operator==(const AffinityCounts&, const AffinityCounts&) = default;
};

struct CompoundAffinity {
  std::string compound_id;
  double dg = 0.0;
};

AffinityCounts bin_affinities(std::span<const CompoundAffinity> estimates,
                              const AffinityThresholds& t = {});

struct TargetCounts {
  std::string target;
  AffinityCounts counts;
};

/// Bins as rows, targets as columns, plus the "< -8.24 total" row.
void write_bin_table_csv(std::ostream& out, std::span<const TargetCounts> targets,
                         const AffinityThresholds& t = {});

// --- Transformation tables ------------------------------------------------

struct Transformation {
  std::string label;
  double ddg = 0.0;
  double sigma = 0.0;
};

struct TransformationSummary {
  std::size_t total = 0;
  std::size_t unfavourable = 0;         // ddg > +1
  std::size_t statistically_zero = 0;   // |ddg| <= 2 sigma
  std::size_t favourable = 0;           // ddg < 0 and not statistically zero
  double max_sigma = 0.0;
  std::string max_sigma_label;
  std::size_t sigma_within_precision = 0;  // sigma <= precision_bound
  double precision_bound = 0.82;
  double min_ddg = 0.0;
  double max_ddg = 0.0;
};

/// Throws InputError for an empty table or a negative sigma.
TransformationSummary summarize_transformations(std::span<const Transformation> table,
                                                double precision_bound = 0.82);

/// Columns label,ddg_kcal_mol,sigma_kcal_mol.
std::vector<Transformation> read_transformations_csv(std::istream& in);
void write_transformations_csv(std::ostream& out, std::span<const Transformation> table);

void write_transformation_summary(std::ostream& out, const TransformationSummary& s);

// --- Input/output CSV schemas ---------------------------------------------

struct CompoundSeries {
  std::string compound_id;
  std::vector<ReplicaSeries> replicas;
};

/// Columns compound_id,replica_id,frame,energy_kcal_mol. Frames are ordered by
/// frame index within each replica; compounds and replicas keep first-seen
/// order. Throws ParseError naming the offending line.
std::vector<CompoundSeries> read_esmacs_csv(std::istream& in);
void write_esmacs_csv(std::ostream& out, std::span<const CompoundSeries> data);

struct TransformationWindows {
  std::string transformation_id;
  std::vector<LambdaWindow> windows;
};

/// Columns transformation_id,lambda,replica_id,sample_index,dudl_kcal_mol.
std::vector<TransformationWindows> read_ties_csv(std::istream& in);
void write_ties_csv(std::ostream& out, std::span<const TransformationWindows> data);

struct NamedEsmacsEstimate {
  std::string compound_id;
  EsmacsEstimate estimate;
};

/// Columns compound_id,dg_kcal_mol,ci_low,ci_high,replicas.
void write_esmacs_estimates_csv(std::ostream& out,
                                std::span<const NamedEsmacsEstimate> rows);
std::vector<NamedEsmacsEstimate> read_esmacs_estimates_csv(std::istream& in);

struct NamedTiesEstimate {
  std::string transformation_id;
  TiesEstimate estimate;
};

/// Columns transformation_id,ddg_kcal_mol,sigma_kcal_mol,windows.
void write_ties_estimates_csv(std::ostream& out, std::span<const NamedTiesEstimate> rows);
std::vector<NamedTiesEstimate> read_ties_estimates_csv(std::istream& in);

}  // namespace campaign::fe
