#include "campaign/surrogate.hpp"

#include <algorithm>
#include <utility>

#include "campaign/errors.hpp"

namespace campaign::funnel {

KnnSurrogate::KnnSurrogate(std::size_t k) : k_(k) {
  if (k_ == 0) throw InputError("k must be at least 1");
}

void KnnSurrogate::fit(std::vector<TrainingPoint> training) {
  std::size_t dim = training.empty() ? 0 : training.front().features.size();
  for (const auto& p : training)
    if (p.features.size() != dim)
      throw InputError("training point '" + p.id + "' has a mismatched feature length");
  std::sort(training.begin(), training.end(),
            [](const TrainingPoint& a, const TrainingPoint& b) { return a.id < b.id; });
  training_ = std::move(training);
  dim_ = dim;
}

double KnnSurrogate::predict(std::span<const double> features) const {
  if (training_.empty()) throw SemanticError("surrogate model is untrained");
  if (features.size() != dim_) throw InputError("query feature length mismatch");

  // (squared distance, index); index order equals id order.
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(training_.size());
  for (std::size_t i = 0; i < training_.size(); ++i) {
    const auto& x = training_[i].features;
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double d = x[j] - features[j];
      d2 += d * d;
    }
    dist.emplace_back(d2, i);
  }
  const auto k = std::min(k_, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += training_[dist[i].second].target;
  return sum / static_cast<double>(k);
}

KnnSurrogate fit_surrogate(std::vector<TrainingPoint> training, std::size_t k) {
  if (training.empty()) throw SemanticError("cannot fit a surrogate on an empty training set");
  KnnSurrogate model(k);
  model.fit(std::move(training));
  return model;
}

double predict(const AffinityModel& model, std::span<const double> features) {
  return model.predict(features);
}

}  // namespace campaign::funnel
