#include "campaign/synthetic_energy.hpp"

#include <random>

#include "campaign/errors.hpp"

namespace campaign::fe {

double DistributionSpec::population_mean() const {
  switch (kind) {
    case DistributionKind::Normal: return mean;
    case DistributionKind::SkewedMixture: return mean + mix_weight * mix_shift;
    case DistributionKind::HeavyTailed: return mean;
  }
  return mean;
}

DistributionSpec parse_distribution(std::string_view id, double mean, double sd) {
  DistributionSpec spec;
  spec.mean = mean;
  spec.sd = sd;
  if (id == "normal") {
    spec.kind = DistributionKind::Normal;
  } else if (id == "skewed-mixture" || id == "mixture") {
    spec.kind = DistributionKind::SkewedMixture;
    spec.mix_shift = 3.0 * sd;
  } else if (id == "heavy-tailed" || id == "student-t") {
    spec.kind = DistributionKind::HeavyTailed;
  } else {
    throw InputError("unknown distribution '" + std::string(id) + "'");
  }
  return spec;
}

double draw(const DistributionSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case DistributionKind::Normal:
      return std::normal_distribution<double>(spec.mean, spec.sd)(rng);
    case DistributionKind::SkewedMixture: {
      std::bernoulli_distribution tail(spec.mix_weight);
      if (tail(rng))
        return std::normal_distribution<double>(spec.mean + spec.mix_shift,
                                                spec.sd * spec.mix_sd_scale)(rng);
      return std::normal_distribution<double>(spec.mean, spec.sd)(rng);
    }
    case DistributionKind::HeavyTailed:
      return spec.mean + spec.sd * std::student_t_distribution<double>(spec.dof)(rng);
  }
  return spec.mean;
}

ReplicaSeries synth_replica_series(const DistributionSpec& spec, std::size_t n,
                                   std::uint64_t seed, std::string replica_id) {
  if (n == 0) throw InputError("a replica series needs at least one sample");
  Rng rng(seed);
  ReplicaSeries r{std::move(replica_id), {}};
  r.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) r.samples.push_back(draw(spec, rng));
  return r;
}

std::vector<ReplicaSeries> synth_ensemble(const EnsembleSpec& spec, std::uint64_t seed) {
  if (spec.replicas == 0 || spec.frames == 0)
    throw InputError("ensemble needs replicas and frames");
  Rng rng(seed);
  std::vector<ReplicaSeries> out;
  out.reserve(spec.replicas);
  std::normal_distribution<double> noise(0.0, spec.frame_sd);
  for (std::size_t k = 0; k < spec.replicas; ++k) {
    const double m = draw(spec.replica_means, rng);
    ReplicaSeries r{"r" + std::to_string(k), {}};
    r.samples.reserve(spec.frames);
    for (std::size_t f = 0; f < spec.frames; ++f)
      r.samples.push_back(spec.frame_sd > 0.0 ? m + noise(rng) : m);
    out.push_back(std::move(r));
  }
  return out;
}

LambdaWindow synth_lambda_window(double lambda, double value, std::size_t replicas,
                                 std::size_t samples, double replica_sd, double sample_sd,
                                 std::uint64_t seed) {
  if (replicas == 0 || samples == 0) throw InputError("window needs replicas and samples");
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  LambdaWindow w{lambda, {}};
  for (std::size_t r = 0; r < replicas; ++r) {
    const double m = value + replica_sd * unit(rng);
    std::vector<double> xs(samples);
    for (auto& x : xs) x = m + sample_sd * unit(rng);
    w.replicas.push_back(std::move(xs));
  }
  return w;
}

std::vector<LambdaWindow> synth_lambda_path(const std::function<double(double)>& integrand,
                                            std::size_t count, std::size_t replicas,
                                            std::size_t samples, double replica_sd,
                                            double sample_sd, std::uint64_t seed) {
  if (count < 2) throw InputError("a lambda path needs at least two windows");
  std::vector<LambdaWindow> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double lambda =
        i + 1 == count ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(synth_lambda_window(lambda, integrand(lambda), replicas, samples,
                                      replica_sd, sample_sd, derive_seed(seed, i)));
  }
  return out;
}

}  // namespace campaign::fe
