#include "skewfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace skewfit {

namespace {

void check_shape(const ScoredLabels& scored) {
  if (scored.scores.size() != scored.labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  if (scored.scores.empty()) {
    throw std::invalid_argument("empty score vector");
  }
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    if (!std::isfinite(scored.scores[i])) {
      throw std::invalid_argument("non-finite score");
    }
    if (scored.labels[i] != 0 && scored.labels[i] != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
}

Rate ratio(std::int64_t numerator, double denominator) {
  if (denominator == 0.0) {
    return {0.0, true};
  }
  return {static_cast<double>(numerator) / denominator, false};
}

}  // namespace

ConfusionCounts confusion(const ScoredLabels& scored, double threshold) {
  check_shape(scored);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must lie in [0, 1]");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    const bool predicted = scored.scores[i] >= threshold;
    if (scored.labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

Rate precision(const ConfusionCounts& c) {
  return ratio(c.tp, static_cast<double>(c.predicted_positives()));
}

Rate recall(const ConfusionCounts& c) { return ratio(c.tp, static_cast<double>(c.actual_positives())); }

Rate f_alpha(const ConfusionCounts& c, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  const double denominator = alpha * static_cast<double>(c.actual_positives()) +
                             (1.0 - alpha) * static_cast<double>(c.predicted_positives());
  return ratio(c.tp, denominator);
}

Rate f_measure(const ConfusionCounts& c) { return f_alpha(c, 0.5); }

Rate accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, static_cast<double>(c.total())); }

double auc(const ScoredLabels& scored, TieRule ties) {
  check_shape(scored);
  const std::size_t n = scored.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored.scores[a] < scored.scores[b]; });

  // Walk tie groups in increasing score order. `twice_correct` accumulates
  // twice the count of correctly ordered pairs so ties stay integral.
  std::int64_t negatives_below = 0;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  std::int64_t twice_correct = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    std::int64_t group_pos = 0;
    std::int64_t group_neg = 0;
    while (end < n && scored.scores[order[end]] == scored.scores[order[start]]) {
      scored.labels[order[end]] == 1 ? ++group_pos : ++group_neg;
      ++end;
    }
    twice_correct += 2 * group_pos * negatives_below;
    if (ties == TieRule::kHalf) {
      twice_correct += group_pos * group_neg;
    }
    negatives_below += group_neg;
    positives += group_pos;
    negatives += group_neg;
    start = end;
  }
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("auc requires both classes");
  }
  return static_cast<double>(twice_correct) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

}  // namespace skewfit
