#include "campaign/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "campaign/csv.hpp"
#include "campaign/errors.hpp"
#include "campaign/rng.hpp"
#include "campaign/synthetic_energy.hpp"

namespace campaign::funnel {

void FunnelConfig::validate() const {
  if (dock_keep < 1 || esmacs_keep < 1) throw InputError("dock_keep and esmacs_keep must be >= 1");
  if (pool_size < dock_keep) throw InputError("pool_size must be >= dock_keep");
  if (dock_keep < esmacs_keep) throw InputError("dock_keep must be >= esmacs_keep");
  if (iterations < 1) throw InputError("iterations must be >= 1");
  if (ties_pairs > 0 && ties_pairs >= esmacs_keep)
    throw InputError("ties_pairs must be smaller than esmacs_keep");
  if (surrogate_k < 1) throw InputError("surrogate_k must be >= 1");
  if (bootstrap_resamples < 100) throw InputError("bootstrap_resamples must be >= 100");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("ci_level must lie in (0, 1)");
}

std::vector<std::string> promote(std::span<const ScoredId> scored, std::size_t n) {
  if (n > scored.size())
    throw InputError("cannot promote " + std::to_string(n) + " of " +
                     std::to_string(scored.size()) + " compounds");
  std::vector<const ScoredId*> order;
  order.reserve(scored.size());
  for (const auto& s : scored) order.push_back(&s);
  auto less = [](const ScoredId* a, const ScoredId* b) {
    if (a->score != b->score) return a->score < b->score;
    return a->id < b->id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    less);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(order[i]->id);
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw InputError("pearson: at least two points are required");
  // Single-pass co-moment update.
  double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    mx += dx / n;
    my += dy / n;
    sxx += dx * (xs[i] - mx);
    syy += dy * (ys[i] - my);
    sxy += dx * (ys[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw SemanticError("undefined correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// --- Landscape and pool -----------------------------------------------------

AffinityLandscape::AffinityLandscape(std::size_t dim, double baseline, std::vector<Well> wells)
    : dim_(dim), baseline_(baseline), wells_(std::move(wells)) {
  if (dim_ == 0) throw InputError("landscape dimension must be >= 1");
  for (const auto& w : wells_)
    if (w.center.size() != dim_ || !(w.width > 0.0))
      throw InputError("malformed landscape well");
}

AffinityLandscape AffinityLandscape::random(std::size_t dim, std::uint64_t seed,
                                            std::size_t wells) {
  Rng rng(seed);
  std::uniform_real_distribution<double> pos(0.15, 0.85), depth(3.0, 6.0), width(0.2, 0.35);
  std::vector<Well> ws;
  for (std::size_t i = 0; i < wells; ++i) {
    Well w;
    for (std::size_t j = 0; j < dim; ++j) w.center.push_back(pos(rng));
    w.depth = depth(rng);
    w.width = width(rng);
    ws.push_back(std::move(w));
  }
  return AffinityLandscape(dim, -6.0, std::move(ws));
}

double AffinityLandscape::operator()(std::span<const double> x) const {
  if (x.size() != dim_) throw InputError("landscape query has the wrong dimension");
  double v = baseline_;
  for (const auto& w : wells_) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double d = x[j] - w.center[j];
      d2 += d * d;
    }
    v -= w.depth * std::exp(-d2 / (2.0 * w.width * w.width));
  }
  return v;
}

std::vector<CompoundRecord> make_synthetic_pool(std::size_t size,
                                                const AffinityLandscape& landscape,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto width = std::to_string(std::max<std::size_t>(size, 1) - 1).size();
  std::vector<CompoundRecord> pool;
  pool.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    CompoundRecord c;
    auto digits = std::to_string(i);
    c.id = "C" + std::string(width - digits.size(), '0') + digits;
    c.features.resize(landscape.dim());
    for (auto& f : c.features) f = unit(rng);
    c.true_affinity = landscape(c.features);
    pool.push_back(std::move(c));
  }
  return pool;
}

// --- Oracles ----------------------------------------------------------------

bool SyntheticOracles::fails(std::string_view stage, const std::string& id) const {
  if (opts_.failure_rate <= 0.0) return false;
  Rng rng(derive_seed(opts_.seed, "fail:" + std::string(stage) + ":" + id));
  return std::bernoulli_distribution(opts_.failure_rate)(rng);
}

std::optional<double> SyntheticOracles::dock(const CompoundRecord& c) const {
  if (!c.true_affinity || fails("dock", c.id)) return std::nullopt;
  Rng rng(derive_seed(opts_.seed, "dock:" + c.id));
  std::normal_distribution<double> noise(0.0, opts_.dock_noise);
  return opts_.dock_offset + opts_.dock_slope * *c.true_affinity + noise(rng);
}

std::optional<std::vector<fe::ReplicaSeries>> SyntheticOracles::esmacs(
    const CompoundRecord& c) const {
  if (!c.true_affinity || fails("esmacs", c.id)) return std::nullopt;
  fe::EnsembleSpec spec;
  spec.replica_means.kind = fe::DistributionKind::Normal;
  spec.replica_means.mean = *c.true_affinity;
  spec.replica_means.sd = opts_.esmacs_replica_sd;
  spec.frame_sd = opts_.esmacs_frame_sd;
  spec.replicas = opts_.esmacs_replicas;
  spec.frames = opts_.esmacs_frames;
  return fe::synth_ensemble(spec, derive_seed(opts_.seed, "esmacs:" + c.id));
}

std::optional<std::vector<fe::LambdaWindow>> SyntheticOracles::ties(
    const CompoundRecord& from, const CompoundRecord& to) const {
  if (!from.true_affinity || !to.true_affinity) return std::nullopt;
  const auto key = from.id + "-" + to.id;
  if (fails("ties", key)) return std::nullopt;
  const double ddg = *to.true_affinity - *from.true_affinity;
  // cos(pi*lambda) integrates to zero on [0,1] (also under a symmetric
  // trapezoid grid), so the path integral is ddg but the integrand is not flat.
  const double pi = std::acos(-1.0);
  auto integrand = [ddg, pi](double l) { return ddg + 2.0 * std::cos(pi * l); };
  return fe::synth_lambda_path(integrand, opts_.lambda_windows, opts_.ties_replicas,
                               opts_.ties_samples, opts_.ties_replica_sd,
                               opts_.ties_sample_sd, derive_seed(opts_.seed, "ties:" + key));
}

FileOracles::FileOracles(std::vector<fe::CompoundSeries> esmacs,
                         std::vector<fe::TransformationWindows> ties) {
  for (auto& c : esmacs) esmacs_[c.compound_id] = std::move(c.replicas);
  for (auto& t : ties) ties_[t.transformation_id] = std::move(t.windows);
}

std::optional<double> FileOracles::dock(const CompoundRecord& c) const { return c.dock_score; }

std::optional<std::vector<fe::ReplicaSeries>> FileOracles::esmacs(const CompoundRecord& c) const {
  auto it = esmacs_.find(c.id);
  if (it == esmacs_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<fe::LambdaWindow>> FileOracles::ties(const CompoundRecord& from,
                                                               const CompoundRecord& to) const {
  auto it = ties_.find(from.id + "-" + to.id);
  if (it == ties_.end()) return std::nullopt;
  return it->second;
}

// --- Campaign ---------------------------------------------------------------

FunnelCampaign::FunnelCampaign(std::vector<CompoundRecord> pool, FunnelConfig cfg,
                               const FunnelOracles& oracles,
                               std::unique_ptr<AffinityModel> model)
    : pool_(std::move(pool)), cfg_(cfg), oracles_(oracles), model_(std::move(model)) {
  if (pool_.empty()) throw InputError("compound pool is empty");
  cfg_.pool_size = pool_.size();
  cfg_.validate();
  if (!model_) model_ = std::make_unique<KnnSurrogate>(cfg_.surrogate_k);
  const auto dim = pool_.front().features.size();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].features.size() != dim)
      throw InputError("compound '" + pool_[i].id + "' has a mismatched feature length");
    if (!index_.emplace(pool_[i].id, i).second)
      throw InputError("duplicate compound id '" + pool_[i].id + "'");
  }
}

std::vector<TrainingPoint> FunnelCampaign::training_set() const {
  std::vector<TrainingPoint> out;
  out.reserve(training_.size());
  for (const auto& [id, p] : training_) out.push_back(p);
  return out;
}

std::vector<std::size_t> FunnelCampaign::select_candidates() {
  std::vector<std::size_t> all(pool_.size());
  std::iota(all.begin(), all.end(), 0);
  const auto exploit = cfg_.exploit_factor * cfg_.dock_keep;
  const auto explore = cfg_.explore_factor * cfg_.dock_keep;
  if (!model_->trained() || exploit + explore >= pool_.size()) return all;

  std::vector<ScoredId> predicted;
  predicted.reserve(pool_.size());
  // A measured ESMACS dG outranks the surrogate's estimate for the same compound.
  for (const auto& c : pool_)
    predicted.push_back(ScoredId{c.id, c.esmacs ? c.esmacs->dg : model_->predict(c.features)});
  auto best = promote(predicted, exploit);

  std::set<std::size_t> chosen;
  for (const auto& id : best) chosen.insert(index_.at(id));
  // Exploration samples compounds whose affinity has not been measured yet.
  std::vector<std::size_t> rest;
  for (auto i : all)
    if (!chosen.contains(i) && !pool_[i].esmacs) rest.push_back(i);
  Rng rng(derive_seed(cfg_.seed, "explore:" + std::to_string(iteration_)));
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t i = 0; i < explore && i < rest.size(); ++i) chosen.insert(rest[i]);
  return {chosen.begin(), chosen.end()};
}

IterationReport FunnelCampaign::run_iteration() {
  ++iteration_;
  IterationReport report;
  report.iteration = iteration_;
  report.surrogate_used = model_->trained();

  // (1) surrogate pre-selection
  const auto candidates = select_candidates();
  report.candidates = candidates.size();

  // (2) docking
  for (auto i : candidates) {
    auto& c = pool_[i];
    auto score = oracles_.dock(c);
    if (!score || !std::isfinite(*score)) {
      report.flagged.push_back({c.id, "dock", "docking oracle failed"});
      continue;
    }
    c.dock_score = *score;
    report.dock_scores.push_back(ScoredId{c.id, *score});
  }
  report.workload.docking_tasks = candidates.size();
  report.dock_promoted =
      promote(report.dock_scores, std::min(cfg_.dock_keep, report.dock_scores.size()));

  // (3) ESMACS
  fe::BootstrapOptions boot;
  boot.resamples = cfg_.bootstrap_resamples;
  boot.ci_level = cfg_.ci_level;
  std::vector<ScoredId> esmacs_scores;
  for (const auto& id : report.dock_promoted) {
    auto& c = pool_[index_.at(id)];
    auto samples = oracles_.esmacs(c);
    if (!samples) {
      report.flagged.push_back({c.id, "esmacs", "ESMACS oracle failed"});
      continue;
    }
    report.workload.esmacs_simulations += samples->size();
    try {
      boot.seed = derive_seed(cfg_.seed, "esmacs-bootstrap:" + c.id);
      auto est = fe::esmacs_aggregate(*samples, boot);
      c.esmacs = est;
      report.esmacs.push_back(EsmacsResult{c.id, est, c.dock_score, c.true_affinity});
      esmacs_scores.push_back(ScoredId{c.id, est.dg});
    } catch (const InputError& e) {
      report.flagged.push_back({c.id, "esmacs", e.what()});
    }
  }
  report.esmacs_promoted =
      promote(esmacs_scores, std::min(cfg_.esmacs_keep, esmacs_scores.size()));

  // (4) TIES over adjacent ranks
  boot.resamples = cfg_.bootstrap_resamples;
  for (std::size_t r = 0; r + 1 < report.esmacs_promoted.size() && r < cfg_.ties_pairs; ++r) {
    const auto& from = pool_[index_.at(report.esmacs_promoted[r])];
    const auto& to = pool_[index_.at(report.esmacs_promoted[r + 1])];
    const auto label = from.id + "-" + to.id;
    auto windows = oracles_.ties(from, to);
    if (!windows) {
      report.flagged.push_back({label, "ties", "TIES oracle failed"});
      continue;
    }
    for (const auto& w : *windows) report.workload.ties_simulations += w.replicas.size();
    try {
      boot.seed = derive_seed(cfg_.seed, "ties-bootstrap:" + label);
      report.ties.push_back(TiesResult{from.id, to.id, fe::ties_integrate(*windows, boot)});
    } catch (const InputError& e) {
      report.flagged.push_back({label, "ties", e.what()});
    }
  }

  // (5) feedback into the surrogate: the best available dG per compound,
  // an ESMACS estimate where one exists and the docking score otherwise.
  for (const auto& d : report.dock_scores) {
    const auto& c = pool_[index_.at(d.id)];
    if (!c.esmacs) training_[c.id] = TrainingPoint{c.id, c.features, d.score};
  }
  for (const auto& r : report.esmacs) {
    const auto& c = pool_[index_.at(r.compound_id)];
    training_[c.id] = TrainingPoint{c.id, c.features, r.estimate.dg};
  }
  if (!training_.empty()) model_->fit(training_set());
  report.training_set_size = training_.size();

  std::vector<double> truth;
  for (const auto& id : report.dock_promoted) {
    const auto& c = pool_[index_.at(id)];
    if (!c.true_affinity) {
      truth.clear();
      break;
    }
    truth.push_back(*c.true_affinity);
  }
  if (!truth.empty())
    report.mean_true_affinity_promoted =
        std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());

  std::vector<double> xs, ys;
  for (const auto& r : report.esmacs)
    if (r.dock_score) {
      xs.push_back(*r.dock_score);
      ys.push_back(r.estimate.dg);
    }
  if (xs.size() >= 2) {
    try {
      report.dock_esmacs_correlation = pearson(xs, ys);
    } catch (const SemanticError&) {
    }
  }
  return report;
}

std::vector<IterationReport> FunnelCampaign::run_all() {
  std::vector<IterationReport> out;
  for (std::size_t i = 0; i < cfg_.iterations; ++i) out.push_back(run_iteration());
  return out;
}

// --- Workflow generation ------------------------------------------------------

namespace {

workload::Duration make_duration(double seconds, double spread) {
  if (spread > 0.0) return workload::StochasticDuration{seconds, spread};
  return workload::FixedDuration{seconds};
}

std::string pad(std::size_t i, std::size_t width) {
  auto s = std::to_string(i);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

}  // namespace

workload::Workflow emit_workflow(const IterationReport& report, const CostModel& cost) {
  using workload::TaskKind;
  workload::Workflow wf;
  for (const auto& e : report.esmacs) {
    workload::Pipeline p{"esmacs-" + e.compound_id, {}};
    workload::Stage sims{p.id + "-sim", {}};
    for (std::size_t r = 0; r < cost.esmacs_replicas; ++r)
      sims.tasks.push_back(workload::TaskSpec{
          p.id + "-rep" + pad(r, 2), TaskKind::EsmacsSim, cost.esmacs_sim_cores,
          cost.esmacs_sim_gpus, false, make_duration(cost.esmacs_sim_seconds, cost.relative_spread)});
    workload::Stage analysis{p.id + "-analysis", {}};
    analysis.tasks.push_back(workload::TaskSpec{
        p.id + "-analysis", TaskKind::EsmacsAnalysis, cost.esmacs_analysis_cores, 0, false,
        make_duration(cost.esmacs_analysis_seconds, cost.relative_spread)});
    p.stages.push_back(std::move(sims));
    p.stages.push_back(std::move(analysis));
    wf.pipelines.push_back(std::move(p));
  }
  for (const auto& t : report.ties) {
    workload::Pipeline p{"ties-" + t.label(), {}};
    workload::Stage sims{p.id + "-sim", {}};
    for (std::size_t r = 0; r < cost.ties_simulations; ++r)
      sims.tasks.push_back(workload::TaskSpec{
          p.id + "-rep" + pad(r, 2), TaskKind::TiesSim, cost.ties_sim_cores, 0,
          cost.ties_sim_spannable, make_duration(cost.ties_sim_seconds, cost.relative_spread)});
    workload::Stage analysis{p.id + "-analysis", {}};
    analysis.tasks.push_back(workload::TaskSpec{
        p.id + "-analysis", TaskKind::TiesAnalysis, cost.ties_analysis_cores, 0, false,
        make_duration(cost.ties_analysis_seconds, cost.relative_spread)});
    p.stages.push_back(std::move(sims));
    p.stages.push_back(std::move(analysis));
    wf.pipelines.push_back(std::move(p));
  }
  return wf;
}

// --- CSV ------------------------------------------------------------------------

void write_pool_csv(std::ostream& out, std::span<const CompoundRecord> pool) {
  csv::Writer w(out);
  const auto dim = pool.empty() ? 0 : pool.front().features.size();
  w.field("id");
  for (std::size_t j = 0; j < dim; ++j) w.field("feature_" + std::to_string(j));
  w.field("dock_score").field("true_affinity");
  w.end_row();
  for (const auto& c : pool) {
    w.field(c.id);
    for (double f : c.features) w.field(f);
    w.field(c.dock_score ? csv::format_double(*c.dock_score) : std::string());
    w.field(c.true_affinity ? csv::format_double(*c.true_affinity) : std::string());
    w.end_row();
  }
}

std::vector<CompoundRecord> read_pool_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_id = table.column("id");
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0;; ++j) {
    auto name = "feature_" + std::to_string(j);
    if (!table.has_column(name)) break;
    feature_cols.push_back(table.column(name));
  }
  if (feature_cols.empty()) throw InputError("pool file has no feature_0 column");
  const bool has_dock = table.has_column("dock_score");
  const bool has_truth = table.has_column("true_affinity");
  std::vector<CompoundRecord> pool;
  for (const auto& row : table.rows()) {
    CompoundRecord c;
    c.id = row.fields[c_id];
    if (c.id.empty()) throw ParseError(row.line, "empty compound id");
    for (auto col : feature_cols) c.features.push_back(csv::parse_double(row.fields[col], row.line));
    if (has_dock && !row.fields[table.column("dock_score")].empty())
      c.dock_score = csv::parse_double(row.fields[table.column("dock_score")], row.line);
    if (has_truth && !row.fields[table.column("true_affinity")].empty())
      c.true_affinity = csv::parse_double(row.fields[table.column("true_affinity")], row.line);
    pool.push_back(std::move(c));
  }
  return pool;
}

void write_iteration_csv(std::ostream& out, const IterationReport& report) {
  std::set<std::string> promoted(report.esmacs_promoted.begin(), report.esmacs_promoted.end());
  csv::Writer w(out);
  w.row({"compound_id", "dock_score", "dg_kcal_mol", "ci_low", "ci_high", "replicas", "promoted"});
  for (const auto& e : report.esmacs) {
    w.field(e.compound_id)
        .field(e.dock_score ? csv::format_double(*e.dock_score) : std::string())
        .field(e.estimate.dg)
        .field(e.estimate.ci_low)
        .field(e.estimate.ci_high)
        .field(e.estimate.replicas)
        .field(promoted.contains(e.compound_id) ? 1 : 0);
    w.end_row();
  }
}

void write_iteration_ties_csv(std::ostream& out, const IterationReport& report) {
  csv::Writer w(out);
  w.row({"transformation_id", "from", "to", "ddg_kcal_mol", "sigma_kcal_mol", "windows"});
  for (const auto& t : report.ties) {
    w.field(t.label())
        .field(t.from)
        .field(t.to)
        .field(t.estimate.ddg)
        .field(t.estimate.sigma)
        .field(t.estimate.windows);
    w.end_row();
  }
}

void write_scatter_csv(std::ostream& out, const IterationReport& report) {
  csv::Writer w(out);
  w.row({"compound_id", "dock_score", "esmacs_dg_kcal_mol", "true_affinity"});
  for (const auto& e : report.esmacs) {
    w.field(e.compound_id)
        .field(e.dock_score ? csv::format_double(*e.dock_score) : std::string())
        .field(e.estimate.dg)
        .field(e.true_affinity ? csv::format_double(*e.true_affinity) : std::string());
    w.end_row();
  }
}

void write_iteration_summary(std::ostream& out, const IterationReport& r) {
  out << "== funnel iteration " << r.iteration << " ==\n";
  out << "surrogate pre-selection  " << (r.surrogate_used ? "yes" : "no (cold start)") << '\n';
  out << "candidates docked        " << r.dock_scores.size() << " of " << r.candidates << '\n';
  out << "promoted to ESMACS       " << r.dock_promoted.size() << '\n';
  out << "ESMACS estimates         " << r.esmacs.size() << '\n';
  out << "promoted past ESMACS     " << r.esmacs_promoted.size() << '\n';
  out << "TIES transformations     " << r.ties.size() << '\n';
  out << "flagged                  " << r.flagged.size() << '\n';
  out << "training set size        " << r.training_set_size << '\n';
  out << "simulations              esmacs=" << r.workload.esmacs_simulations
      << " ties=" << r.workload.ties_simulations << " docking=" << r.workload.docking_tasks
      << '\n';
  if (r.mean_true_affinity_promoted)
    out << "mean true dG (promoted)  " << csv::format_double(*r.mean_true_affinity_promoted)
        << '\n';
  if (r.dock_esmacs_correlation)
    out << "pearson(dock, ESMACS)    " << csv::format_double(*r.dock_esmacs_correlation) << '\n';
  for (const auto& f : r.flagged) out << "flag " << f.stage << ' ' << f.id << ": " << f.reason << '\n';
}

}  // namespace campaign::funnel
