#pragma once

#include <cstdint>
#include <vector>

namespace skewfit {

/// Confusion-matrix tallies. Positive prediction means score >= threshold.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t actual_positives() const { return tp + fn; }
  std::int64_t actual_negatives() const { return fp + tn; }
  std::int64_t predicted_positives() const { return tp + fp; }
  std::int64_t predicted_negatives() const { return fn + tn; }
  std::int64_t total() const { return tp + fp + fn + tn; }

  bool operator==(const ConfusionCounts&) const = default;
};

struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;
};

/// A ratio metric. A zero denominator yields value 0 with `degenerate` set.
struct Rate {
  double value = 0.0;
  bool degenerate = false;
};

ConfusionCounts confusion(const ScoredLabels& scored, double threshold = 0.5);

Rate precision(const ConfusionCounts& c);
Rate recall(const ConfusionCounts& c);
/// TP / (alpha * n_p + (1 - alpha) * m_p); 0 <= alpha <= 1.
Rate f_alpha(const ConfusionCounts& c, double alpha);
/// Harmonic mean of precision and recall, i.e. f_alpha(c, 0.5).
Rate f_measure(const ConfusionCounts& c);
Rate accuracy(const ConfusionCounts& c);

enum class TieRule {
  kHalf,    // tied (positive, negative) pairs count 1/2
  kStrict,  // only strictly greater positive scores count
};

/// Fraction of (positive, negative) pairs ordered correctly, computed by
/// sorting. Throws unless both classes are present.
double auc(const ScoredLabels& scored, TieRule ties = TieRule::kHalf);

}  // namespace skewfit
