#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace campaign::funnel {

struct TrainingPoint {
  std::string id;
  std::vector<double> features;
  double target = 0.0;  // binding free energy, kcal/mol
};

/// Trainable affinity predictor used to pre-rank the compound pool.
class AffinityModel {
 public:
  virtual ~AffinityModel() = default;

  virtual void fit(std::vector<TrainingPoint> training) = 0;
  /// Throws SemanticError when the model has not been trained.
  virtual double predict(std::span<const double> features) const = 0;
  virtual bool trained() const = 0;
  virtual std::string_view name() const = 0;
};

/// k-nearest-neighbour regression with Euclidean distance. Neighbours are
/// ordered by (distance, training id) so equidistant points resolve to the
/// lexicographically lower id. When fewer than k points are available the
/// whole training set is averaged.
class KnnSurrogate final : public AffinityModel {
 public:
  explicit KnnSurrogate(std::size_t k = 5);

  /// Throws InputError for mismatched feature lengths.
  void fit(std::vector<TrainingPoint> training) override;
  double predict(std::span<const double> features) const override;
  bool trained() const override { return !training_.empty(); }
  std::string_view name() const override { return "knn"; }

  std::size_t k() const noexcept { return k_; }
  const std::vector<TrainingPoint>& training() const noexcept { return training_; }

 private:
  std::size_t k_;
  std::size_t dim_ = 0;
  std::vector<TrainingPoint> training_;  // sorted by id
};

/// Convenience wrappers. fit_surrogate throws SemanticError for an empty
/// training set (an untrained model cannot be produced).
KnnSurrogate fit_surrogate(std::vector<TrainingPoint> training, std::size_t k = 5);
double predict(const AffinityModel& model, std::span<const double> features);

}  // namespace campaign::funnel
