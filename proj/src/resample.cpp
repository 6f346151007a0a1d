#include "skewfit/resample.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "skewfit/rng.hpp"

namespace skewfit {

SmoteResult smote_detailed(const Dataset& data, const SmoteConfig& config) {
  validate(data);
  if (config.k_neighbors < 1) {
    throw std::invalid_argument("smote: k_neighbors must be >= 1");
  }
  if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
    throw std::invalid_argument("smote: target_ratio must lie in (0, 1]");
  }

  SmoteResult result;
  const std::size_t positives = data.positives();
  const std::size_t negatives = data.negatives();
  result.minority_label = positives <= negatives ? 1.0 : 0.0;
  const std::size_t majority_count = std::max(positives, negatives);

  std::vector<std::size_t> minority;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    if (data.labels(i) == result.minority_label) {
      minority.push_back(static_cast<std::size_t>(i));
    }
  }
  if (minority.size() < 2) {
    throw std::invalid_argument("smote: minority class needs at least two rows");
  }

  int k = config.k_neighbors;
  if (static_cast<std::size_t>(k) > minority.size() - 1) {
    k = static_cast<int>(minority.size() - 1);
    result.warning = "k_neighbors reduced to " + std::to_string(k) + " (minority class has " +
                     std::to_string(minority.size()) + " rows)";
  }
  result.k_used = k;

  const auto target = static_cast<std::size_t>(
      std::llround(config.target_ratio * static_cast<double>(majority_count)));
  const std::size_t synthetic = target > minority.size() ? target - minority.size() : 0;

  // Nearest minority neighbours of every minority row, ties by index.
  const std::size_t m = minority.size();
  std::vector<std::vector<std::size_t>> neighbours(m);
  std::vector<std::pair<double, std::size_t>> dist(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double d2 = (data.features.row(static_cast<Eigen::Index>(minority[a])) -
                         data.features.row(static_cast<Eigen::Index>(minority[b])))
                            .squaredNorm();
      dist[b] = {b == a ? std::numeric_limits<double>::infinity() : d2, b};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int j = 0; j < k; ++j) {
      neighbours[a].push_back(dist[static_cast<std::size_t>(j)].second);
    }
  }

  Rng rng(config.seed);
  const Eigen::Index n = data.rows();
  result.data.features.resize(n + static_cast<Eigen::Index>(synthetic), data.cols());
  result.data.labels.resize(n + static_cast<Eigen::Index>(synthetic));
  result.data.features.topRows(n) = data.features;
  result.data.labels.head(n) = data.labels;
  result.data.feature_names = data.feature_names;
  result.data.name = data.name;
  result.origins.reserve(synthetic);
  for (std::size_t s = 0; s < synthetic; ++s) {
    const std::size_t a = s % m;
    const std::size_t b = neighbours[a][static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)))];
    const double gap = rng.uniform();
    const auto row = n + static_cast<Eigen::Index>(s);
    const auto base = data.features.row(static_cast<Eigen::Index>(minority[a]));
    const auto other = data.features.row(static_cast<Eigen::Index>(minority[b]));
    result.data.features.row(row) = base + gap * (other - base);
    result.data.labels(row) = result.minority_label;
    result.origins.push_back({minority[a], minority[b], gap});
  }
  return result;
}

Dataset smote(const Dataset& data, const SmoteConfig& config) { return smote_detailed(data, config).data; }

}  // namespace skewfit
