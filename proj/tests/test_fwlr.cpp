#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "skewfit/bench.hpp"
#include "skewfit/fwlr.hpp"
#include "skewfit/metrics.hpp"
#include "test_util.hpp"

using namespace skewfit;

namespace {

FwlrConfig base_config(double lambda_beta = 0.1) {
  FwlrConfig c;
  c.lambda_beta = lambda_beta;
  c.seed = 5;
  return c;
}

Dataset synthetic_train(int setting, std::uint64_t seed, std::size_t n = 400) {
  const Dataset raw = generate_synthetic(synthetic_setting(setting), n, seed);
  return apply_normalizer(fit_normalizer(raw), raw);
}

}  // namespace

TEST(TrainingWeights, ClipFloorRenormalize) {
  Eigen::VectorXd raw(4);
  raw << -0.5, 0.0, 1.0, 3.0;
  double mean = 0, clip = 0;
  const SampleWeights w = training_weights(raw, true, &mean, &clip);
  EXPECT_DOUBLE_EQ(clip, 0.25);
  EXPECT_DOUBLE_EQ(mean, 1.0);
  EXPECT_NEAR(w.values().mean(), 1.0, 1e-6);
  EXPECT_GE(w.values().minCoeff(), kWeightFloor);
  const SampleWeights raw_scale = training_weights(raw, false);
  EXPECT_EQ(raw_scale[0], kWeightFloor);
  EXPECT_EQ(raw_scale[3], 3.0);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  EXPECT_THROW(training_weights(bad, true), std::runtime_error);
}

TEST(Fwlr, InfiniteEpsilonRunsLoopOnce) {
  FwlrConfig c = base_config();
  c.epsilon = std::numeric_limits<double>::infinity();
  const FwlrResult r = fit_fwlr(synthetic_train(1, 3), c);
  EXPECT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_TRUE(r.trace.converged);
}

TEST(Fwlr, AlphaOneMatchesPlainLogistic) {
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = synthetic_train(1 + rep % 6, 100 + static_cast<std::uint64_t>(rep), 300 + 20 * rep);
    FwlrConfig c = base_config();
    c.alpha = 1.0;
    c.seed = static_cast<std::uint64_t>(rep);
    const FwlrResult r = fit_fwlr(d, c);
    GlmOptions o;
    o.lambda_beta = c.lambda_beta;
    const ModelParams plain = fit(d, o).params;
    EXPECT_LT((r.params.beta - plain.beta).norm(), 1e-3) << "dataset " << rep;
    EXPECT_LE(static_cast<int>(r.trace.iterations.size()), c.max_outer_iterations);
  }
}

TEST(Fwlr, TerminatesWithinCap) {
  FwlrConfig c = base_config();
  c.max_outer_iterations = 2;
  c.epsilon = 1e-300;
  const FwlrResult r = fit_fwlr(synthetic_train(5, 4), c);
  EXPECT_EQ(r.trace.iterations.size(), 2u);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_TRUE(r.params.beta.allFinite());
}

TEST(Fwlr, BitIdenticalAcrossRuns) {
  const Dataset d = synthetic_train(2, 6);
  for (bool reselect : {false, true}) {
    FwlrConfig c = base_config();
    c.reselect_each_iteration = reselect;
    const FwlrResult a = fit_fwlr(d, c);
    const FwlrResult b = fit_fwlr(d, c);
    EXPECT_EQ(a.params.beta, b.params.beta);
    EXPECT_EQ(a.ratio.theta, b.ratio.theta);
    EXPECT_EQ(a.trace.to_json_lines(), b.trace.to_json_lines());
  }
}

TEST(Fwlr, TraceAndWeightInvariants) {
  for (int setting = 1; setting <= 6; ++setting) {
    const Dataset d = synthetic_train(setting, 7);
    const FwlrResult r = fit_fwlr(d, base_config());
    ASSERT_FALSE(r.trace.iterations.empty());
    if (r.trace.converged) {
      EXPECT_LT(r.trace.iterations.back().step_squared, base_config().epsilon);
    }
    EXPECT_TRUE(r.weights.allFinite());
    EXPECT_GE(r.weights.minCoeff(), kWeightFloor);
    EXPECT_EQ(r.weights.size(), d.rows());
    for (std::size_t i = 0; i < r.trace.iterations.size(); ++i) {
      const auto& it = r.trace.iterations[i];
      EXPECT_EQ(it.iteration, static_cast<int>(i) + 1);
      EXPECT_GE(it.weight_min, kWeightFloor);
      EXPECT_GE(it.clip_rate, 0.0);
      EXPECT_LE(it.clip_rate, 1.0);
    }
    std::istringstream lines(r.trace.to_json_lines());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) ++count;
    EXPECT_EQ(count, r.trace.iterations.size());
  }
}

TEST(Fwlr, RejectsSingleClassAndBadConfig) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  EXPECT_THROW(fit_fwlr(testutil::make_dataset(x, Eigen::Vector3d::Ones()), base_config()), std::exception);
  const Dataset d = synthetic_train(4, 8, 100);
  FwlrConfig c = base_config();
  c.epsilon = 0.0;
  EXPECT_THROW(fit_fwlr(d, c), std::invalid_argument);
  c = base_config();
  c.max_outer_iterations = 0;
  EXPECT_THROW(fit_fwlr(d, c), std::invalid_argument);
}

TEST(Predict, PairsScoresWithLabels) {
  const Dataset d = synthetic_train(4, 9, 50);
  GlmOptions o;
  const ModelParams p = fit(d, o).params;
  const ScoredLabels s = predict(p, d);
  ASSERT_EQ(s.scores.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(s.labels[i], static_cast<int>(d.labels(static_cast<Eigen::Index>(i))));
    EXPECT_EQ(s.scores[i], score(p, d.features.row(static_cast<Eigen::Index>(i)).transpose()));
  }
}

// Setting 5, n = 1000 per trial, 7:3 split, both methods at the same
// lambda_beta: the weighted fit should win on F for most trials.
TEST(Fwlr, BeatsLogisticOnSetting5MostTrials) {
  ExperimentConfig config;
  config.source.setting_id = 5;
  config.source.synthetic_n = 1000;
  config.seed = 2024;
  int wins = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const TrialData t = prepare_trial(config, nullptr, trial);
    const FwlrResult fw = fit_fwlr(t.train, base_config(0.1));
    GlmOptions o;
    o.lambda_beta = 0.1;
    const ModelParams plain = fit(t.train, o).params;
    const double f_fw = f_measure(confusion(predict(fw.params, t.test))).value;
    const double f_lr = f_measure(confusion(predict(plain, t.test))).value;
    wins += f_fw > f_lr;
  }
  EXPECT_GT(wins, 25);
}
