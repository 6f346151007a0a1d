#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skewfit/data.hpp"

namespace skewfit {

struct SmoteConfig {
  int k_neighbors = 5;
  // Minority/majority count ratio to reach, in (0, 1].
  double target_ratio = 1.0;
  std::uint64_t seed = 0;
};

/// Where a synthetic row came from: base + gap * (neighbor - base).
struct SmoteOrigin {
  std::size_t base = 0;      // row index in the input dataset
  std::size_t neighbor = 0;  // row index in the input dataset
  double gap = 0.0;
};

struct SmoteResult {
  Dataset data;  // original rows first, synthetic rows appended
  std::vector<SmoteOrigin> origins;
  double minority_label = 1.0;
  int k_used = 0;
  std::string warning;  // set when k had to be reduced
};

/// SMOTE oversampling of the smaller class. Base rows are visited round
/// robin; each synthetic row interpolates towards a uniformly chosen one of
/// the base row's k nearest same-class neighbours (Euclidean).
/// Throws if the minority class has fewer than two rows.
SmoteResult smote_detailed(const Dataset& data, const SmoteConfig& config);

Dataset smote(const Dataset& data, const SmoteConfig& config);

}  // namespace skewfit
