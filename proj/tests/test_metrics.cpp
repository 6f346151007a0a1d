#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "skewfit/metrics.hpp"

using namespace skewfit;

namespace {

ConfusionCounts counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
  ConfusionCounts c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.tn = tn;
  return c;
}

}  // namespace

TEST(Confusion, PerfectClassifier) {
  ScoredLabels s{{1, 0, 1, 1, 0}, {1, 0, 1, 1, 0}};
  const auto c = confusion(s, 0.5);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 0);
  EXPECT_EQ(c.tp, 3);
  EXPECT_EQ(c.tn, 2);
}

TEST(Confusion, AllNegativePrediction) {
  ScoredLabels s{{0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}};
  const auto c = confusion(s, 0.5);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fn, 2);
}

TEST(Confusion, DirectTally) {
  ScoredLabels s{{0.9, 0.4, 0.6}, {1, 1, 0}};
  EXPECT_EQ(confusion(s, 0.5), counts(1, 1, 1, 0));
}

TEST(Confusion, BoundaryIsInclusive) {
  ScoredLabels s{{0.5, 0.5}, {1, 0}};
  EXPECT_EQ(confusion(s, 0.5), counts(1, 1, 0, 0));
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion(ScoredLabels{}, 0.5), std::exception);
  EXPECT_THROW(confusion(ScoredLabels{{0.1, 0.2}, {1}}, 0.5), std::exception);
}

TEST(Precision, Examples) {
  EXPECT_DOUBLE_EQ(precision(counts(3, 1, 0, 0)).value, 0.75);
  const Rate empty = precision(counts(0, 0, 4, 4));
  EXPECT_EQ(empty.value, 0.0);
  EXPECT_TRUE(empty.degenerate);
  EXPECT_EQ(precision(counts(5, 0, 1, 1)).value, 1.0);
  EXPECT_FALSE(precision(counts(5, 0, 1, 1)).degenerate);
}

TEST(Recall, Examples) {
  EXPECT_DOUBLE_EQ(recall(counts(3, 0, 2, 0)).value, 0.6);
  const Rate empty = recall(counts(0, 3, 0, 3));
  EXPECT_EQ(empty.value, 0.0);
  EXPECT_TRUE(empty.degenerate);
  EXPECT_EQ(recall(counts(4, 2, 0, 1)).value, 1.0);
}

TEST(FAlpha, HalfIsHarmonicMean) {
  const auto c = counts(3, 1, 2, 0);
  const double f = f_alpha(c, 0.5).value;
  EXPECT_NEAR(f, 2.0 / 3.0, 1e-15);
  const double p = 0.75, r = 0.6;
  EXPECT_NEAR(f, 2 * p * r / (p + r), 1e-15);
  EXPECT_EQ(f_measure(c).value, f);
}

TEST(FAlpha, ExtremesAndDegenerate) {
  const auto c = counts(3, 1, 2, 7);
  EXPECT_EQ(f_alpha(c, 1.0).value, recall(c).value);
  EXPECT_EQ(f_alpha(c, 0.0).value, precision(c).value);
  const Rate zero = f_alpha(counts(0, 0, 0, 5), 0.5);
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(zero.degenerate);
  // Zero precision with a non-zero denominator is a regular 0.
  const Rate miss = f_alpha(counts(0, 2, 3, 1), 0.5);
  EXPECT_EQ(miss.value, 0.0);
  EXPECT_FALSE(miss.degenerate);
}

TEST(FAlpha, IdentitiesOnRandomCounts) {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> dist(0, 50);
  for (int i = 0; i < 10000; ++i) {
    const auto c = counts(dist(gen), dist(gen), dist(gen), dist(gen));
    ASSERT_EQ(f_alpha(c, 0.5).value, f_measure(c).value);
    if (c.actual_positives() > 0) ASSERT_EQ(f_alpha(c, 1.0).value, recall(c).value);
    if (c.predicted_positives() > 0) ASSERT_EQ(f_alpha(c, 0.0).value, precision(c).value);
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
      const double v = f_alpha(c, a).value;
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy(counts(3, 0, 0, 4)).value, 1.0);
  EXPECT_EQ(accuracy(counts(0, 3, 4, 0)).value, 0.0);
  EXPECT_EQ(accuracy(counts(1, 1, 1, 1)).value, 0.5);
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(ScoredLabels{{0.9, 0.4, 0.5, 0.1}, {1, 1, 0, 0}}), 0.75);
  EXPECT_DOUBLE_EQ(auc(ScoredLabels{{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(auc(ScoredLabels{{0.3, 0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0, 0}}), 0.5);
  EXPECT_DOUBLE_EQ(auc(ScoredLabels{{0.3, 0.3, 0.3}, {1, 0, 0}}, TieRule::kStrict), 0.0);
}

TEST(Auc, SingleClassThrows) {
  EXPECT_THROW(auc(ScoredLabels{{0.1, 0.2}, {1, 1}}), std::exception);
  EXPECT_THROW(auc(ScoredLabels{{0.1, 0.2}, {0, 0}}), std::exception);
}

TEST(Auc, MatchesBruteForceWithAndWithoutTies) {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = size(gen);
    const int levels = rep % 3 == 0 ? 3 : (rep % 3 == 1 ? 20 : 0);
    ScoredLabels s;
    for (int i = 0; i < n; ++i) {
      const double u = unif(gen);
      s.scores.push_back(levels > 0 ? std::floor(u * levels) / levels : u);
      s.labels.push_back(unif(gen) < 0.3 ? 1 : 0);
    }
    s.labels[0] = 1;
    s.labels[1] = 0;
    ASSERT_NEAR(auc(s), oracle::brute_auc(s.scores, s.labels, true), 1e-12);
    ASSERT_NEAR(auc(s, TieRule::kStrict), oracle::brute_auc(s.scores, s.labels, false), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 50; ++rep) {
    ScoredLabels s, t;
    for (int i = 0; i < 60; ++i) {
      const double u = std::round(unif(gen) * 10) / 10;
      const int y = unif(gen) < 0.4 ? 1 : 0;
      s.scores.push_back(u);
      s.labels.push_back(y);
      t.scores.push_back(std::exp(3 * u) / 50.0);
      t.labels.push_back(y);
    }
    s.labels[0] = t.labels[0] = 1;
    s.labels[1] = t.labels[1] = 0;
    EXPECT_EQ(auc(s), auc(t));
    const double v = auc(s);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
