#include "campaign_cli/config.hpp"

#include <cmath>
#include <fstream>

#include "campaign/errors.hpp"
#include "campaign_cli/toml_lite.hpp"

namespace campaign::cli {

std::vector<placement::NodeSpec> ClusterConfig::node_specs() const {
  std::vector<placement::NodeSpec> out;
  for (int i = 0; i < nodes; ++i) out.push_back({"n" + std::to_string(i), cores, gpus});
  return out;
}

namespace {

std::size_t to_count(std::int64_t v, std::string_view name) {
  if (v < 0) throw InputError(std::string(name) + " must not be negative");
  return static_cast<std::size_t>(v);
}

int to_int(std::int64_t v, std::string_view name) {
  if (v < 0 || v > 1'000'000) throw InputError(std::string(name) + " is out of range");
  return static_cast<int>(v);
}

class Reader {
 public:
  Reader(const toml::Document& doc, std::filesystem::path base)
      : doc_(doc), base_(std::move(base)) {}

  void count(std::string_view t, std::string_view k, std::size_t& out) const {
    if (auto v = doc_.get_int(t, k)) out = to_count(*v, k);
  }
  void integer(std::string_view t, std::string_view k, int& out) const {
    if (auto v = doc_.get_int(t, k)) out = to_int(*v, k);
  }
  void real(std::string_view t, std::string_view k, double& out) const {
    if (auto v = doc_.get_double(t, k)) out = *v;
  }
  void boolean(std::string_view t, std::string_view k, bool& out) const {
    if (auto v = doc_.get_bool(t, k)) out = *v;
  }
  void path(std::string_view t, std::string_view k, std::optional<std::filesystem::path>& out) const {
    if (auto v = doc_.get_string(t, k)) {
      if (v->empty()) return;
      std::filesystem::path p(*v);
      out = p.is_absolute() || base_.empty() ? p : base_ / p;
    }
  }

 private:
  const toml::Document& doc_;
  std::filesystem::path base_;
};

}  // namespace

void set_seed(CampaignConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.funnel.seed = seed;
  cfg.oracles.seed = seed;
}

void validate(const CampaignConfig& cfg) {
  if (cfg.cluster.nodes < 1) throw InputError("cluster.nodes must be >= 1");
  if (cfg.cluster.cores < 1) throw InputError("cluster.cores must be >= 1");
  if (cfg.cluster.gpus < 0) throw InputError("cluster.gpus must not be negative");
  cfg.funnel.validate();
  if (cfg.pool.feature_dim < 1) throw InputError("funnel.feature_dim must be >= 1");
  if (!(cfg.stats.rt > 0.0)) throw InputError("stats.rt must be positive");
  if (cfg.stats.bootstrap_n < 100) throw InputError("stats.bootstrap_n must be >= 100");
  if (!(cfg.stats.ci_level > 0.0 && cfg.stats.ci_level < 1.0))
    throw InputError("stats.ci_level must lie in (0, 1)");
  if (cfg.stats.lambda_windows < 2) throw InputError("stats.lambda_windows must be >= 2");
  if (cfg.stats.ties_replicas < 2) throw InputError("stats.ties_replicas must be >= 2");
  if (cfg.stats.esmacs_replicas < 2) throw InputError("stats.esmacs_replicas must be >= 2");
  if (cfg.stats.esmacs_frames < 1) throw InputError("stats.esmacs_frames must be >= 1");
  if (!(cfg.oracles.dock_noise >= 0.0)) throw InputError("funnel.dock_noise must not be negative");
  if (!(cfg.oracles.failure_rate >= 0.0 && cfg.oracles.failure_rate <= 1.0))
    throw InputError("funnel.failure_rate must lie in [0, 1]");
  const auto& c = cfg.cost;
  if (!(c.esmacs_sim_seconds > 0.0 && c.esmacs_analysis_seconds > 0.0 &&
        c.ties_sim_seconds > 0.0 && c.ties_analysis_seconds > 0.0))
    throw InputError("workload durations must be positive");
  if (c.ties_sim_cores < 1) throw InputError("workload.ties_sim_cores must be >= 1");
  if (!(c.relative_spread >= 0.0)) throw InputError("workload.relative_spread must not be negative");
  if (cfg.classifier.window < 2) throw InputError("classifier.window must be >= 2");
  if (cfg.classifier.horizon < 1) throw InputError("classifier.horizon must be >= 1");
  if (cfg.pool.esmacs_file && !cfg.pool.pool_file)
    throw InputError("funnel.esmacs_file requires funnel.pool_file");
}

CampaignConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto doc = toml::Document::parse(text);
  const Reader r(doc, base_dir);
  CampaignConfig cfg;

  auto seed = doc.get_int("", "seed");
  if (!seed) throw InputError("config must set 'seed'");
  if (*seed < 0) throw InputError("seed must not be negative");
  cfg.seed = static_cast<std::uint64_t>(*seed);
  if (auto out = doc.get_string("", "output_dir")) cfg.output_dir = *out;

  r.integer("cluster", "nodes", cfg.cluster.nodes);
  r.integer("cluster", "cores", cfg.cluster.cores);
  r.integer("cluster", "gpus", cfg.cluster.gpus);

  auto& f = cfg.funnel;
  r.count("funnel", "pool_size", f.pool_size);
  r.count("funnel", "dock_keep", f.dock_keep);
  r.count("funnel", "esmacs_keep", f.esmacs_keep);
  r.count("funnel", "ties_pairs", f.ties_pairs);
  r.count("funnel", "iterations", f.iterations);
  r.count("funnel", "surrogate_k", f.surrogate_k);
  r.count("funnel", "exploit_factor", f.exploit_factor);
  r.count("funnel", "explore_factor", f.explore_factor);
  r.count("funnel", "feature_dim", cfg.pool.feature_dim);
  r.count("funnel", "wells", cfg.pool.wells);
  r.path("funnel", "pool_file", cfg.pool.pool_file);
  r.path("funnel", "esmacs_file", cfg.pool.esmacs_file);
  r.path("funnel", "ties_file", cfg.pool.ties_file);
  r.real("funnel", "dock_slope", cfg.oracles.dock_slope);
  r.real("funnel", "dock_offset", cfg.oracles.dock_offset);
  r.real("funnel", "dock_noise", cfg.oracles.dock_noise);
  r.real("funnel", "failure_rate", cfg.oracles.failure_rate);

  auto& s = cfg.stats;
  r.real("stats", "rt", s.rt);
  r.count("stats", "bootstrap_n", s.bootstrap_n);
  r.real("stats", "ci_level", s.ci_level);
  r.count("stats", "lambda_windows", s.lambda_windows);
  r.count("stats", "ties_replicas", s.ties_replicas);
  r.count("stats", "esmacs_replicas", s.esmacs_replicas);
  r.count("stats", "esmacs_frames", s.esmacs_frames);
  r.real("stats", "esmacs_replica_sd", cfg.oracles.esmacs_replica_sd);
  r.real("stats", "esmacs_frame_sd", cfg.oracles.esmacs_frame_sd);

  auto& c = cfg.cost;
  r.integer("workload", "esmacs_sim_cores", c.esmacs_sim_cores);
  r.integer("workload", "esmacs_sim_gpus", c.esmacs_sim_gpus);
  r.real("workload", "esmacs_sim_seconds", c.esmacs_sim_seconds);
  r.integer("workload", "esmacs_analysis_cores", c.esmacs_analysis_cores);
  r.real("workload", "esmacs_analysis_seconds", c.esmacs_analysis_seconds);
  r.integer("workload", "ties_sim_cores", c.ties_sim_cores);
  r.boolean("workload", "ties_sim_spannable", c.ties_sim_spannable);
  r.real("workload", "ties_sim_seconds", c.ties_sim_seconds);
  r.integer("workload", "ties_analysis_cores", c.ties_analysis_cores);
  r.real("workload", "ties_analysis_seconds", c.ties_analysis_seconds);
  r.real("workload", "relative_spread", c.relative_spread);

  r.count("classifier", "window", cfg.classifier.window);
  r.count("classifier", "horizon", cfg.classifier.horizon);

  doc.reject_unused();

  // Replica counts drive both the oracles and the generated workload.
  f.bootstrap_resamples = s.bootstrap_n;
  f.ci_level = s.ci_level;
  set_seed(cfg, cfg.seed);
  cfg.oracles.esmacs_replicas = s.esmacs_replicas;
  cfg.oracles.esmacs_frames = s.esmacs_frames;
  cfg.oracles.lambda_windows = s.lambda_windows;
  cfg.oracles.ties_replicas = s.ties_replicas;
  c.esmacs_replicas = s.esmacs_replicas;
  c.ties_simulations = s.lambda_windows * s.ties_replicas;

  validate(cfg);
  return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, path.parent_path());
}

}  // namespace campaign::cli
