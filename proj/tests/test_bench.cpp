#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "skewfit/bench.hpp"
#include "skewfit/report.hpp"
#include "test_util.hpp"

using namespace skewfit;

namespace {

ExperimentConfig small_config(int setting, std::vector<Method> methods, int trials = 2, std::size_t n = 300) {
  ExperimentConfig c;
  c.source.setting_id = setting;
  c.source.synthetic_n = n;
  c.methods = std::move(methods);
  c.trials = trials;
  c.seed = 11;
  return c;
}

void expect_same_result(const TrialResult& a, const TrialResult& b) {
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.method, b.method);
  EXPECT_EQ(a.trial, b.trial);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.auc, b.auc);
  EXPECT_EQ(a.f_measure, b.f_measure);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.hyperparameters.lambda_beta, b.hyperparameters.lambda_beta);
  EXPECT_EQ(a.hyperparameters.sigma, b.hyperparameters.sigma);
  EXPECT_EQ(a.hyperparameters.lambda_theta, b.hyperparameters.lambda_theta);
  EXPECT_EQ(a.failed, b.failed);
}

SummaryRow row(const std::string& dataset, Method m, double auc_mean, double f_mean) {
  SummaryRow r;
  r.dataset = dataset;
  r.method = m;
  r.count = 3;
  r.auc = {auc_mean, 0.01, auc_mean - 0.02, auc_mean + 0.02};
  r.f_measure = {f_mean, 0.02, f_mean - 0.03, f_mean + 0.03};
  r.accuracy = {0.9, 0.005, 0.89, 0.91};
  return r;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : all_methods()) EXPECT_EQ(method_from_name(method_name(m)), m);
  EXPECT_EQ(all_methods().size(), 5u);
  EXPECT_THROW(method_from_name("svm"), ConfigError);
}

TEST(Config, DefaultsFromJson) {
  const ExperimentConfig syn = config_from_json(R"({"dataset": {"type": "synthetic", "setting": 3, "n": 500}})");
  EXPECT_EQ(syn.trials, 100);
  EXPECT_EQ(syn.source.setting_id, 3);
  EXPECT_EQ(syn.source.synthetic_n, 500u);
  EXPECT_EQ(syn.methods.size(), 5u);
  EXPECT_EQ(syn.train_fraction, 0.7);
  EXPECT_EQ(syn.cv_folds, 5u);
  EXPECT_EQ(syn.lambda_beta_grid, (std::vector<double>{0.01, 0.1, 1, 10}));
  EXPECT_EQ(syn.sigma_grid, (std::vector<double>{0.01, 0.1, 1, 10}));
  EXPECT_EQ(syn.alpha, 0.5);
  EXPECT_EQ(syn.threshold, 0.5);
  const ExperimentConfig csv = config_from_json(
      R"({"dataset": {"type": "csv", "path": "x.csv", "label_column": "y", "positive_label": "1"},
          "methods": ["logistic", "smote"], "seed": 9})");
  EXPECT_EQ(csv.trials, 30);
  EXPECT_EQ(csv.methods, (std::vector<Method>{Method::kLogistic, Method::kSmote}));
  EXPECT_EQ(csv.seed, 9u);
}

TEST(Config, InvalidInputsRaiseConfigError) {
  const char* bad[] = {
      "not json",
      R"({"methods": ["logistic"]})",
      R"({"dataset": {"type": "synthetic"}, "methods": []})",
      R"({"dataset": {"type": "synthetic"}, "trials": 0})",
      R"({"dataset": {"type": "synthetic"}, "lambda_beta_grid": []})",
      R"({"dataset": {"type": "synthetic"}, "sigma_grid": [0.0]})",
      R"({"dataset": {"type": "synthetic"}, "methods": ["svm"]})",
      R"({"dataset": {"type": "synthetic", "setting": 9}})",
      R"({"dataset": {"type": "parquet"}})",
      R"({"dataset": {"type": "synthetic"}, "train_fraction": 1.0})",
      R"({"dataset": {"type": "synthetic"}, "trials": "many"})",
  };
  for (const char* text : bad) EXPECT_THROW(config_from_json(text), ConfigError) << text;
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_config(5, {Method::kProposed, Method::kJansche}, 7, 321);
  c.lambda_theta_grid = {0.5};
  c.fwlr_reselect_each_iteration = false;
  c.smote_k = 3;
  const ExperimentConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.methods, c.methods);
  EXPECT_EQ(back.trials, 7);
  EXPECT_EQ(back.lambda_theta_grid, c.lambda_theta_grid);
}

TEST(Config, RelativeCsvPathResolvesAgainstConfigFile) {
  const auto path = testutil::temp_file(
      "rel_config.json", R"({"dataset": {"type": "csv", "path": "d.csv", "label_column": "y", "positive_label": "1"}})");
  const ExperimentConfig c = load_config(path);
  EXPECT_EQ(c.source.csv_path, path.parent_path() / "d.csv");
}

TEST(GridSearch, SingleCellGrid) {
  ExperimentConfig c = small_config(1, {Method::kLogistic});
  c.lambda_beta_grid = {0.3};
  const TrialData t = prepare_trial(c, nullptr, 0);
  const GridSearchResult g = grid_search(Method::kLogistic, t.train, c, 1);
  EXPECT_EQ(g.best.lambda_beta, 0.3);
  EXPECT_EQ(g.cells.size(), 1u);
}

TEST(GridSearch, SweepsLambdaBetaOnlyAndIsDeterministic) {
  const ExperimentConfig c = small_config(2, {});
  const TrialData t = prepare_trial(c, nullptr, 0);
  for (Method m : all_methods()) {
    const GridSearchResult a = grid_search(m, t.train, c, 3);
    const GridSearchResult b = grid_search(m, t.train, c, 3);
    ASSERT_EQ(a.cells.size(), 4u) << method_name(m);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(a.cells[i].params.lambda_beta, c.lambda_beta_grid[i]);
      EXPECT_EQ(a.cells[i].mean_auc, b.cells[i].mean_auc);
      EXPECT_TRUE(a.cells[i].error.empty());
      EXPECT_EQ(a.cells[i].folds_scored, 5);
    }
    EXPECT_EQ(a.best.lambda_beta, b.best.lambda_beta);
    double best = -1;
    for (const auto& cell : a.cells) best = std::max(best, cell.mean_auc);
    for (const auto& cell : a.cells) {
      if (cell.params.lambda_beta == a.best.lambda_beta) EXPECT_EQ(cell.mean_auc, best);
    }
  }
}

// One feature: every lambda_beta yields the same ranking, so all cells tie.
TEST(GridSearch, TiesGoToLargerLambda) {
  std::mt19937_64 gen(4);
  const Dataset d = testutil::random_dataset(gen, 120, 1);
  ExperimentConfig c = small_config(1, {Method::kLogistic});
  const GridSearchResult g = grid_search(Method::kLogistic, d, c, 5);
  for (const auto& cell : g.cells) EXPECT_EQ(cell.mean_auc, g.cells[0].mean_auc);
  EXPECT_EQ(g.best.lambda_beta, 10.0);
}

TEST(GridSearch, AllCellsFailingReportsEachCell) {
  ExperimentConfig c = small_config(1, {Method::kLogistic});
  c.lambda_beta_grid = {-1.0, -2.0};
  const TrialData t = prepare_trial(small_config(1, {}), nullptr, 0);
  try {
    grid_search(Method::kLogistic, t.train, c, 1);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("lambda_beta=-1"), std::string::npos);
    EXPECT_NE(what.find("lambda_beta=-2"), std::string::npos);
  }
}

TEST(PrepareTrial, NormalizesOnTrainingRowsOnly) {
  const ExperimentConfig c = small_config(3, {});
  const TrialData t = prepare_trial(c, nullptr, 1);
  EXPECT_EQ(t.train.rows(), 210);
  EXPECT_EQ(t.test.rows(), 90);
  for (Eigen::Index j = 0; j < t.train.cols(); ++j) {
    const double mean = t.train.features.col(j).mean();
    const double sd = std::sqrt((t.train.features.col(j).array() - mean).square().sum() / (t.train.rows() - 1));
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(sd, 1.0, 1e-10);
  }
  EXPECT_TRUE(t.train.has_both_classes());
  EXPECT_TRUE(t.test.has_both_classes());
}

// Replacing every test row with garbage must not move any fitted parameter.
TEST(Leakage, TestRowsNeverReachTheFit) {
  const ExperimentConfig c = small_config(5, {});
  const TrialData t = prepare_trial(c, nullptr, 0);
  TrialData poisoned = t;
  std::mt19937_64 gen(9);
  std::normal_distribution<double> wild(50.0, 100.0);
  for (Eigen::Index i = 0; i < poisoned.test.rows(); ++i) {
    for (Eigen::Index j = 0; j < poisoned.test.cols(); ++j) poisoned.test.features(i, j) = wild(gen);
    poisoned.test.labels(i) = 1.0 - poisoned.test.labels(i);
  }
  for (Method m : all_methods()) {
    const MethodOutcome a = evaluate_method(m, t, c, 0);
    const MethodOutcome b = evaluate_method(m, poisoned, c, 0);
    ASSERT_FALSE(a.result.failed) << a.result.error;
    EXPECT_EQ(a.model.params.beta, b.model.params.beta) << method_name(m);
    EXPECT_EQ(a.result.hyperparameters.lambda_beta, b.result.hyperparameters.lambda_beta);
    if (m == Method::kProposed) {
      ASSERT_TRUE(a.model.ratio.has_value());
      EXPECT_EQ(a.model.ratio->theta, b.model.ratio->theta);
    }
  }
}

TEST(RunExperiment, SingleLogisticTrialOnSetting4) {
  const ExperimentConfig c = small_config(4, {Method::kLogistic}, 1, 1000);
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_FALSE(r.trials[0].failed);
  EXPECT_GE(r.trials[0].auc, 0.7);
  EXPECT_LE(r.trials[0].auc, 0.9);
}

TEST(RunExperiment, DeterministicAndOrderIndependent) {
  const ExperimentConfig c = small_config(1, {Method::kProposed, Method::kLogistic, Method::kSmote}, 3);
  const ExperimentResult a = run_experiment(c);
  const ExperimentResult b = run_experiment(c);
  ASSERT_EQ(a.trials.size(), 9u);
  for (std::size_t i = 0; i < a.trials.size(); ++i) expect_same_result(a.trials[i], b.trials[i]);

  // Trial 2 evaluated alone, without trials 0 and 1 before it.
  const TrialData t = prepare_trial(c, nullptr, 2);
  for (std::size_t k = 0; k < c.methods.size(); ++k) {
    expect_same_result(evaluate_method(c.methods[k], t, c, 2).result, a.trials[6 + k]);
  }
  // Method order does not change any method's result.
  ExperimentConfig reversed = c;
  std::reverse(reversed.methods.begin(), reversed.methods.end());
  const ExperimentResult r = run_experiment(reversed);
  for (const auto& x : r.trials) {
    for (const auto& y : a.trials) {
      if (x.trial == y.trial && x.method == y.method) expect_same_result(x, y);
    }
  }
}

TEST(RunExperiment, SummaryAndMetricRanges) {
  const ExperimentConfig c = small_config(6, {Method::kCostSensitive, Method::kJansche}, 4);
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.summary.size(), 2u);
  for (const auto& s : r.summary) {
    EXPECT_EQ(s.count, 4);
    EXPECT_EQ(s.failures, 0);
    for (const MetricSummary* m : {&s.auc, &s.f_measure, &s.accuracy}) {
      EXPECT_GE(m->mean, m->min);
      EXPECT_LE(m->mean, m->max);
      EXPECT_GE(m->sd, 0.0);
    }
  }
  for (const auto& t : r.trials) {
    for (double v : {t.auc, t.f_measure, t.accuracy}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_FALSE(t.hyperparameters.sigma.has_value());
  }
}

TEST(RunExperiment, ProposedRecordsRatioHyperparameters) {
  const ExperimentConfig c = small_config(2, {Method::kProposed}, 1);
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_TRUE(r.trials[0].hyperparameters.sigma.has_value());
  EXPECT_TRUE(r.trials[0].hyperparameters.lambda_theta.has_value());
}

TEST(Summarize, FailuresAreCountedAndExcluded) {
  std::vector<TrialResult> results(3);
  for (int i = 0; i < 3; ++i) {
    results[static_cast<std::size_t>(i)].dataset = "d";
    results[static_cast<std::size_t>(i)].method = Method::kLogistic;
    results[static_cast<std::size_t>(i)].trial = i;
    results[static_cast<std::size_t>(i)].auc = 0.5 + 0.1 * i;
  }
  results[2].failed = true;
  results[2].error = "boom";
  const auto rows = summarize(results);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].count, 2);
  EXPECT_EQ(rows[0].failures, 1);
  EXPECT_NEAR(rows[0].auc.mean, 0.55, 1e-15);
  EXPECT_NEAR(rows[0].auc.sd, std::sqrt(0.005), 1e-15);
}

TEST(TrialResultJson, RoundTripThroughFile) {
  TrialResult a;
  a.dataset = "setting1";
  a.method = Method::kProposed;
  a.trial = 4;
  a.seed = 0xFFFFFFFFFFFFFFF1ULL;
  a.hyperparameters = {0.1, 0.01, 10.0};
  a.auc = 0.812345678901234;
  a.f_measure = 1.0 / 3.0;
  a.accuracy = 0.75;
  a.wall_time_s = 1.25;
  TrialResult b = a;
  b.method = Method::kLogistic;
  b.hyperparameters = {1.0, std::nullopt, std::nullopt};
  b.failed = true;
  b.error = "did not fit";
  const auto path = testutil::temp_file("results.jsonl", "");
  write_trial_results({a, b}, path);
  const auto back = read_trial_results(path);
  ASSERT_EQ(back.size(), 2u);
  expect_same_result(back[0], a);
  expect_same_result(back[1], b);
  EXPECT_EQ(back[1].error, "did not fit");
  EXPECT_EQ(back[0].wall_time_s, 1.25);
  EXPECT_THROW(trial_result_from_json("{\"method\": \"logistic\"}"), std::runtime_error);
}

TEST(Report, EmptyResultsAreAnError) {
  EXPECT_THROW(emit_report(std::vector<SummaryRow>{}, ReportFormat::kMarkdown), std::invalid_argument);
  EXPECT_THROW(emit_report(std::vector<TrialResult>{}, ReportFormat::kCsv), std::invalid_argument);
  EXPECT_THROW(report_format_from_name("html"), std::invalid_argument);
  EXPECT_EQ(report_format_from_name("md"), ReportFormat::kMarkdown);
}

TEST(Report, MarkdownBoldsBestMeanPerRow) {
  const std::vector<SummaryRow> rows{row("yeast", Method::kProposed, 0.80, 0.282),
                                     row("yeast", Method::kLogistic, 0.85, 0.187),
                                     row("oil", Method::kProposed, 0.70, 0.1),
                                     row("oil", Method::kLogistic, 0.60, 0.2)};
  const std::string md = emit_report(rows, ReportFormat::kMarkdown);
  EXPECT_NE(md.find("## AUC"), std::string::npos);
  EXPECT_NE(md.find("## F-measure"), std::string::npos);
  EXPECT_NE(md.find("## Accuracy"), std::string::npos);
  EXPECT_NE(md.find("| yeast | mean | 0.8000 | **0.8500** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| oil | mean | **0.7000** | 0.6000 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| yeast | mean | **0.2820** | 0.1870 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| yeast | sd | 0.0100 | 0.0100 |"), std::string::npos) << md;
}

TEST(Report, CsvRoundTrips) {
  const std::vector<SummaryRow> rows{row("a", Method::kSmote, 0.61, 1.0 / 7.0), row("a", Method::kJansche, 0.6, 0.3),
                                     row("b", Method::kSmote, 0.9, 0.4)};
  const auto back = read_report_csv(emit_report(rows, ReportFormat::kCsv));
  const auto expected = report_entries(rows);
  ASSERT_EQ(back.size(), expected.size());
  for (const auto& e : expected) {
    bool found = false;
    for (const auto& b : back) {
      if (b.metric == e.metric && b.dataset == e.dataset && b.method == e.method) {
        found = true;
        EXPECT_EQ(b.mean, e.mean);
        EXPECT_EQ(b.sd, e.sd);
      }
    }
    EXPECT_TRUE(found) << e.metric << " " << e.dataset;
  }
}
