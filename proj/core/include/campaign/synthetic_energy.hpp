#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "campaign/free_energy.hpp"
#include "campaign/rng.hpp"

namespace campaign::fe {

// Seeded generators of synthetic energy samples for exercising the
// estimators. Free-energy predictions from independent simulations are
// typically non-normal, so skewed and heavy-tailed shapes are provided.

enum class DistributionKind { Normal, SkewedMixture, HeavyTailed };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::Normal;
  double mean = 0.0;
  double sd = 1.0;
  // SkewedMixture: with probability mix_weight the draw comes from
  // N(mean + mix_shift, sd * mix_sd_scale) instead of N(mean, sd).
  double mix_weight = 0.2;
  double mix_shift = 3.0;
  double mix_sd_scale = 1.0;
  // HeavyTailed: mean + sd * StudentT(dof).
  double dof = 3.0;

  /// Expected value of a draw.
  double population_mean() const;
};

/// "normal", "skewed-mixture" or "heavy-tailed" with default shape
/// parameters around the given mean/sd. Throws InputError otherwise.
DistributionSpec parse_distribution(std::string_view id, double mean = 0.0, double sd = 1.0);

double draw(const DistributionSpec& spec, Rng& rng);

/// n independent draws. Throws InputError for n == 0.
ReplicaSeries synth_replica_series(const DistributionSpec& spec, std::size_t n,
                                   std::uint64_t seed, std::string replica_id = "r0");

struct EnsembleSpec {
  DistributionSpec replica_means;   // distribution of per-replica true means
  double frame_sd = 0.5;            // within-replica frame noise
  std::size_t replicas = 25;
  std::size_t frames = 50;
};

/// Replica k has true mean m_k ~ replica_means and frames m_k + N(0, frame_sd).
std::vector<ReplicaSeries> synth_ensemble(const EnsembleSpec& spec, std::uint64_t seed);

/// A window whose replica means scatter around integrand(lambda).
LambdaWindow synth_lambda_window(double lambda, double value, std::size_t replicas,
                                 std::size_t samples, double replica_sd, double sample_sd,
                                 std::uint64_t seed);

/// Evenly spaced grid of `count` windows on [0, 1] for an integrand.
std::vector<LambdaWindow> synth_lambda_path(const std::function<double(double)>& integrand,
                                            std::size_t count, std::size_t replicas,
                                            std::size_t samples, double replica_sd,
                                            double sample_sd, std::uint64_t seed);

}  // namespace campaign::fe
