#include "campaign_cli/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "campaign/csv.hpp"
#include "campaign/errors.hpp"
#include "campaign/free_energy.hpp"
#include "campaign/funnel.hpp"
#include "campaign/rng.hpp"
#include "campaign/simulator.hpp"
#include "campaign/transitions.hpp"
#include "campaign_cli/config.hpp"

namespace campaign::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

class Session {
 public:
  Session(const Common& common, std::ostream& out, std::ostream& err, bool config_required)
      : out_(out) {
    if (!common.config.empty()) {
      cfg_ = load_config(common.config);
    } else if (config_required) {
      throw InputError("--config is required for this subcommand");
    }
    if (common.seed) set_seed(cfg_, *common.seed);
    if (!common.out.empty()) cfg_.output_dir = common.out;

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    log_ = std::make_shared<spdlog::logger>("campaign", sink);
    log_->set_pattern("[%Y-%m-%d %H:%M:%S] %v");
    log_->set_level(common.quiet ? spdlog::level::off : spdlog::level::info);
  }

  CampaignConfig& config() { return cfg_; }
  std::ostream& out() { return out_; }
  spdlog::logger& log() { return *log_; }

  fs::path output(const std::string& name) {
    std::error_code ec;
    fs::create_directories(cfg_.output_dir, ec);
    if (ec)
      throw InputError("cannot create output directory '" + cfg_.output_dir.string() +
                       "': " + ec.message());
    auto p = cfg_.output_dir / name;
    written_.push_back(p);
    return p;
  }

  template <class Fn>
  void write(const std::string& name, Fn&& fn) {
    auto path = output(name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    fn(f);
    if (!f) throw InputError("failed writing '" + path.string() + "'");
  }

  void done(std::string_view command) {
    log_->info("{}: wrote {} file(s) to {}", command, written_.size(), cfg_.output_dir.string());
  }

 private:
  CampaignConfig cfg_;
  std::ostream& out_;
  std::shared_ptr<spdlog::logger> log_;
  std::vector<fs::path> written_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return in;
}

// --- funnel plumbing ------------------------------------------------------

struct FunnelSetup {
  std::vector<funnel::CompoundRecord> pool;
  std::unique_ptr<funnel::FunnelOracles> oracles;
};

FunnelSetup make_funnel(const CampaignConfig& cfg) {
  FunnelSetup s;
  if (cfg.pool.pool_file) {
    auto in = open_input(cfg.pool.pool_file->string());
    s.pool = funnel::read_pool_csv(in);
  } else {
    auto landscape = funnel::AffinityLandscape::random(
        cfg.pool.feature_dim, derive_seed(cfg.seed, "landscape"), cfg.pool.wells);
    s.pool = funnel::make_synthetic_pool(cfg.funnel.pool_size, landscape,
                                         derive_seed(cfg.seed, "pool"));
  }
  if (cfg.pool.esmacs_file) {
    auto ein = open_input(cfg.pool.esmacs_file->string());
    auto esmacs = fe::read_esmacs_csv(ein);
    std::vector<fe::TransformationWindows> ties;
    if (cfg.pool.ties_file) {
      auto tin = open_input(cfg.pool.ties_file->string());
      ties = fe::read_ties_csv(tin);
    }
    s.oracles = std::make_unique<funnel::FileOracles>(std::move(esmacs), std::move(ties));
  } else {
    s.oracles = std::make_unique<funnel::SyntheticOracles>(cfg.oracles);
  }
  return s;
}

std::vector<funnel::IterationReport> run_funnel(const CampaignConfig& cfg) {
  auto setup = make_funnel(cfg);
  auto fcfg = cfg.funnel;
  fcfg.pool_size = setup.pool.size();
  funnel::FunnelCampaign campaign(std::move(setup.pool), fcfg, *setup.oracles);
  return campaign.run_all();
}

void prefix_ids(workload::Workflow& wf, const std::string& prefix) {
  for (auto& p : wf.pipelines) {
    p.id = prefix + p.id;
    for (auto& s : p.stages) {
      s.id = prefix + s.id;
      for (auto& t : s.tasks) t.id = prefix + t.id;
    }
  }
}

// --- subcommands ------------------------------------------------------------

int cmd_simulate(Session& s) {
  const auto& cfg = s.config();
  const auto reports = run_funnel(cfg);

  sim::SimConfig sc;
  sc.nodes = cfg.cluster.node_specs();
  sc.seed = cfg.seed;

  // Iterations are sequential barriers: each one's workflow starts when the
  // previous one has drained.
  sim::Trace trace;
  double offset = 0.0;
  std::size_t tasks = 0;
  for (const auto& report : reports) {
    auto wf = funnel::emit_workflow(report, cfg.cost);
    if (wf.empty()) continue;
    if (reports.size() > 1) prefix_ids(wf, "it" + std::to_string(report.iteration) + "-");
    auto iter_cfg = sc;
    iter_cfg.seed = derive_seed(cfg.seed, report.iteration);
    auto result = sim::run(wf, iter_cfg);
    for (auto& r : result.trace.records) {
      r.start += offset;
      r.end += offset;
      trace.records.push_back(std::move(r));
    }
    for (auto& e : result.trace.events) {
      e.time += offset;
      trace.events.push_back(std::move(e));
    }
    offset += result.metrics.makespan;
    tasks += wf.task_count();
  }

  sim::SimMetrics metrics;
  metrics.makespan = offset;
  metrics.node_hours = sim::node_hours(trace);
  std::vector<placement::NodeUtilization> per_node;
  if (offset > 0.0) {
    metrics.utilization = placement::utilization(trace.records, sc.nodes, offset);
    per_node = placement::per_node_utilization(trace.records, sc.nodes, offset);
  } else {
    for (const auto& n : sc.nodes) per_node.push_back({n.id, {}});
  }

  s.write("trace.csv", [&](std::ostream& f) { sim::write_trace_csv(f, trace); });
  s.write("metrics.csv", [&](std::ostream& f) { sim::write_metrics_csv(f, metrics); });
  s.write("utilization.csv", [&](std::ostream& f) { sim::write_utilization_csv(f, per_node); });
  s.write("summary.txt", [&](std::ostream& f) { sim::write_summary(f, metrics, sc, tasks); });
  sim::write_summary(s.out(), metrics, sc, tasks);
  s.done("simulate");
  return kExitOk;
}

int cmd_funnel(Session& s) {
  const auto reports = run_funnel(s.config());
  for (const auto& r : reports) {
    const auto n = std::to_string(r.iteration);
    s.write("report_iter" + n + ".csv", [&](std::ostream& f) { funnel::write_iteration_csv(f, r); });
    s.write("ties_iter" + n + ".csv",
            [&](std::ostream& f) { funnel::write_iteration_ties_csv(f, r); });
    s.write("scatter_iter" + n + ".csv", [&](std::ostream& f) { funnel::write_scatter_csv(f, r); });
    s.write("summary_iter" + n + ".txt",
            [&](std::ostream& f) { funnel::write_iteration_summary(f, r); });
    funnel::write_iteration_summary(s.out(), r);
  }
  s.done("funnel");
  return kExitOk;
}

fe::BootstrapOptions bootstrap_options(const CampaignConfig& cfg, std::optional<std::size_t> n,
                                       std::optional<double> ci) {
  fe::BootstrapOptions b;
  b.resamples = n.value_or(cfg.stats.bootstrap_n);
  b.ci_level = ci.value_or(cfg.stats.ci_level);
  b.seed = cfg.seed;
  return b;
}

int cmd_esmacs(Session& s, const std::string& input, std::optional<std::size_t> n,
               std::optional<double> ci) {
  auto in = open_input(input);
  const auto data = fe::read_esmacs_csv(in);
  auto boot = bootstrap_options(s.config(), n, ci);
  std::vector<fe::NamedEsmacsEstimate> rows;
  for (const auto& c : data) {
    boot.seed = derive_seed(s.config().seed, "esmacs-bootstrap:" + c.compound_id);
    try {
      rows.push_back({c.compound_id, fe::esmacs_aggregate(c.replicas, boot)});
    } catch (const InputError& e) {
      throw InputError("compound '" + c.compound_id + "': " + e.what());
    }
  }
  s.write("esmacs_estimates.csv",
          [&](std::ostream& f) { fe::write_esmacs_estimates_csv(f, rows); });
  fe::write_esmacs_estimates_csv(s.out(), rows);
  s.done("esmacs-aggregate");
  return kExitOk;
}

int cmd_ties(Session& s, const std::string& input, std::optional<std::size_t> n) {
  auto in = open_input(input);
  const auto data = fe::read_ties_csv(in);
  auto boot = bootstrap_options(s.config(), n, std::nullopt);
  std::vector<fe::NamedTiesEstimate> rows;
  for (const auto& t : data) {
    boot.seed = derive_seed(s.config().seed, "ties-bootstrap:" + t.transformation_id);
    try {
      rows.push_back({t.transformation_id, fe::ties_integrate(t.windows, boot)});
    } catch (const InputError& e) {
      throw InputError("transformation '" + t.transformation_id + "': " + e.what());
    }
  }
  s.write("ties_estimates.csv", [&](std::ostream& f) { fe::write_ties_estimates_csv(f, rows); });
  fe::write_ties_estimates_csv(s.out(), rows);
  s.done("ties-integrate");
  return kExitOk;
}

int cmd_classify(Session& s, const std::string& input, std::optional<std::size_t> window,
                 std::optional<std::size_t> horizon) {
  auto in = open_input(input);
  const auto residues = tc::parse_class_file(in);
  auto opts = s.config().classifier;
  if (window) opts.window = *window;
  if (horizon) opts.horizon = *horizon;
  if (opts.window < 2) throw InputError("--window must be >= 2");
  if (opts.horizon < 1) throw InputError("--horizon must be >= 1");

  const tc::MarkovPredictor predictor(opts.window);
  const auto run = tc::classify(residues, predictor, opts);
  s.write("transitions.csv", [&](std::ostream& f) { tc::write_evaluation_csv(f, run.table); });
  if (run.outcomes.empty()) {
    s.out() << "no events: none of the " << residues.size()
            << " residues changes class\n";
  } else {
    s.out() << run.outcomes.size() << " events over " << residues.size() << " residues";
    if (!run.skipped.empty()) s.out() << " (" << run.skipped.size() << " skipped: too few frames)";
    s.out() << '\n';
    tc::write_evaluation_csv(s.out(), run.table);
  }
  s.done("classify-transitions");
  return kExitOk;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

int cmd_report(Session& s, const std::vector<std::string>& estimates,
               const std::string& transformations, const std::string& funnel_report) {
  if (estimates.empty() && transformations.empty() && funnel_report.empty())
    throw InputError("report needs --estimates, --transformations or --funnel-report");

  const double rt = s.config().stats.rt;
  const fe::AffinityThresholds thresholds{round2(fe::kd_to_dg(1e-8, rt)),
                                          round2(fe::kd_to_dg(1e-7, rt)),
                                          round2(fe::kd_to_dg(1e-6, rt))};
  if (!estimates.empty()) {
    std::vector<fe::TargetCounts> targets;
    for (const auto& path : estimates) {
      auto in = open_input(path);
      const auto rows = fe::read_esmacs_estimates_csv(in);
      std::vector<fe::CompoundAffinity> dgs;
      for (const auto& r : rows) dgs.push_back({r.compound_id, r.estimate.dg});
      targets.push_back({fs::path(path).stem().string(), fe::bin_affinities(dgs, thresholds)});
    }
    s.write("affinity_bins.csv",
            [&](std::ostream& f) { fe::write_bin_table_csv(f, targets, thresholds); });
    fe::write_bin_table_csv(s.out(), targets, thresholds);
  }
  if (!transformations.empty()) {
    auto in = open_input(transformations);
    const auto table = fe::read_transformations_csv(in);
    const auto summary = fe::summarize_transformations(table);
    s.write("transformation_summary.txt",
            [&](std::ostream& f) { fe::write_transformation_summary(f, summary); });
    fe::write_transformation_summary(s.out(), summary);
  }
  if (!funnel_report.empty()) {
    auto in = open_input(funnel_report);
    const auto table = csv::Table::read(in);
    const auto c_id = table.column("compound_id");
    const auto c_dock = table.column("dock_score");
    const auto c_dg = table.column("dg_kcal_mol");
    s.write("scatter.csv", [&](std::ostream& f) {
      csv::Writer w(f);
      w.row({"compound_id", "dock_score", "dg_kcal_mol"});
      for (const auto& row : table.rows()) {
        if (row.fields[c_dock].empty()) continue;
        w.field(row.fields[c_id])
            .field(csv::parse_double(row.fields[c_dock], row.line))
            .field(csv::parse_double(row.fields[c_dg], row.line));
        w.end_row();
      }
    });
  }
  s.done("report");
  return kExitOk;
}

void add_common(CLI::App& sub, Common& c, bool config_required) {
  auto* opt = sub.add_option("--config", c.config, "Campaign config file (TOML)");
  if (config_required) opt->required();
  sub.add_option("--seed", c.seed, "Override the config seed");
  sub.add_option("--out", c.out, "Output directory (overrides output_dir)");
  sub.add_flag("--quiet", c.quiet, "Suppress the timestamped log line");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity screening campaign engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "campaign 0.1.0");

  Common common;
  std::string input;
  std::optional<std::size_t> bootstrap_n;
  std::optional<double> ci_level;
  std::optional<std::size_t> window, horizon;
  std::vector<std::string> estimates;
  std::string transformations, funnel_report;

  auto* simulate = app.add_subcommand("simulate", "Run the funnel and simulate its workload");
  add_common(*simulate, common, true);
  auto* fun = app.add_subcommand("funnel", "Run funnel iterations and write per-iteration reports");
  add_common(*fun, common, true);

  auto* esmacs = app.add_subcommand("esmacs-aggregate", "Ensemble dG estimates from replica energies");
  add_common(*esmacs, common, false);
  esmacs->add_option("--input", input, "compound_id,replica_id,frame,energy_kcal_mol CSV")
      ->required();
  esmacs->add_option("--bootstrap-n", bootstrap_n, "Bootstrap resamples");
  esmacs->add_option("--ci-level", ci_level, "Confidence level");

  auto* ties = app.add_subcommand("ties-integrate", "Relative ddG from lambda-window samples");
  add_common(*ties, common, false);
  ties->add_option("--input", input,
                   "transformation_id,lambda,replica_id,sample_index,dudl_kcal_mol CSV")
      ->required();
  ties->add_option("--bootstrap-n", bootstrap_n, "Bootstrap resamples");

  auto* classify = app.add_subcommand("classify-transitions",
                                      "Markov occupancy prediction for class-change events");
  add_common(*classify, common, false);
  classify->add_option("--input", input, "Class file: one line per frame")->required();
  classify->add_option("--window", window, "Frames used to build each transition matrix");
  classify->add_option("--horizon", horizon, "Frames after the event to predict");

  auto* report = app.add_subcommand("report", "Affinity bins, transformation summary, scatter data");
  add_common(*report, common, false);
  report->add_option("--estimates", estimates, "ESMACS estimate CSVs, one per target");
  report->add_option("--transformations", transformations, "label,ddg_kcal_mol,sigma_kcal_mol CSV");
  report->add_option("--funnel-report", funnel_report, "A report_iter<n>.csv from `funnel`");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (simulate->parsed()) {
      Session s(common, out, err, true);
      return cmd_simulate(s);
    }
    if (fun->parsed()) {
      Session s(common, out, err, true);
      return cmd_funnel(s);
    }
    if (esmacs->parsed()) {
      Session s(common, out, err, false);
      return cmd_esmacs(s, input, bootstrap_n, ci_level);
    }
    if (ties->parsed()) {
      Session s(common, out, err, false);
      return cmd_ties(s, input, bootstrap_n);
    }
    if (classify->parsed()) {
      Session s(common, out, err, false);
      return cmd_classify(s, input, window, horizon);
    }
    if (report->parsed()) {
      Session s(common, out, err, false);
      return cmd_report(s, estimates, transformations, funnel_report);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SemanticError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSemantic;
  } catch (const LedgerFault& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitInput;
}

}  // namespace campaign::cli
