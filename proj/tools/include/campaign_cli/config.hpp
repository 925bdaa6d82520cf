#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "campaign/free_energy.hpp"
#include "campaign/funnel.hpp"
#include "campaign/simulator.hpp"
#include "campaign/transitions.hpp"

namespace campaign::cli {

struct ClusterConfig {
  int nodes = 4;
  int cores = 42;
  int gpus = 6;

  /// Homogeneous node list "n0".."n<N-1>".
  std::vector<placement::NodeSpec> node_specs() const;
};

struct PoolConfig {
  std::size_t feature_dim = 4;
  std::size_t wells = 3;
  std::optional<std::filesystem::path> pool_file;
  std::optional<std::filesystem::path> esmacs_file;
  std::optional<std::filesystem::path> ties_file;
};

struct StatsConfig {
  double rt = fe::kDefaultRT;
  std::size_t bootstrap_n = 1000;
  double ci_level = 0.95;
  std::size_t lambda_windows = 13;
  std::size_t ties_replicas = 5;
  std::size_t esmacs_replicas = 25;
  std::size_t esmacs_frames = 50;
};

struct CampaignConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "campaign-out";
  ClusterConfig cluster;
  funnel::FunnelConfig funnel;
  PoolConfig pool;
  funnel::SyntheticOracleOptions oracles;
  StatsConfig stats;
  funnel::CostModel cost;
  tc::ClassifierOptions classifier;
};

/// Parses a config file. Input file paths inside it resolve against the
/// file's directory; output_dir is taken as given. Throws InputError (exit code 2) for syntax errors,
/// unknown keys, a missing seed or out-of-range values.
CampaignConfig load_config(const std::filesystem::path& path);
CampaignConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Sets the campaign seed and every seed derived from it.
void set_seed(CampaignConfig& cfg, std::uint64_t seed);

/// Range checks shared by the loader and command-line overrides.
void validate(const CampaignConfig& cfg);

}  // namespace campaign::cli
