#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skewfit/data.hpp"
#include "skewfit/fwlr.hpp"
#include "skewfit/glm.hpp"
#include "skewfit/optimizer.hpp"

namespace skewfit {

enum class Method { kProposed, kLogistic, kCostSensitive, kJansche, kSmote };

std::string_view method_name(Method method);
/// Accepts proposed, logistic, cost_sensitive, jansche, smote.
Method method_from_name(std::string_view name);
const std::vector<Method>& all_methods();

/// Invalid or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSource {
  enum class Kind { kCsv, kSynthetic };
  Kind kind = Kind::kSynthetic;
  std::filesystem::path csv_path;
  std::string label_column;
  std::string positive_label;
  int setting_id = 1;
  std::size_t synthetic_n = 1000;
};

struct ExperimentConfig {
  DataSource source;
  std::vector<Method> methods{Method::kProposed, Method::kLogistic, Method::kCostSensitive, Method::kJansche,
                              Method::kSmote};
  int trials = 100;
  double train_fraction = 0.7;
  std::size_t cv_folds = 5;
  std::vector<double> lambda_beta_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<double> lambda_theta_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<double> sigma_grid{0.01, 0.1, 1.0, 10.0};
  double alpha = 0.5;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  bool include_intercept = true;
  OptimizerSettings optimizer;
  double fwlr_epsilon = 1e-6;
  int fwlr_max_outer_iterations = 100;
  // false: RuLSIF hyperparameters are cross-validated on the first outer
  // pass only, then held fixed (cheaper).
  bool fwlr_reselect_each_iteration = true;
  int smote_k = 5;
  double smote_target_ratio = 1.0;
};

/// Throws ConfigError when an invariant is broken.
void validate(const ExperimentConfig& config);

/// Parses the JSON form. Missing keys keep their defaults, except `trials`
/// which defaults to 100 for synthetic sources and 30 for CSV sources.
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

struct Hyperparameters {
  double lambda_beta = 0.0;
  std::optional<double> sigma;         // proposed only
  std::optional<double> lambda_theta;  // proposed only
};

struct GridCell {
  Hyperparameters params;
  double mean_auc = 0.0;
  int folds_scored = 0;
  std::string error;  // non-empty when the cell could not be scored
};

struct GridSearchResult {
  Hyperparameters best;
  std::vector<GridCell> cells;
};

/// Sweeps the lambda_beta grid, scoring each cell by mean validation AUC
/// over stratified k folds of `train`. Ties go to the larger lambda_beta.
/// Throws std::runtime_error listing per-cell errors if no cell scores.
GridSearchResult grid_search(Method method, const Dataset& train, const ExperimentConfig& config,
                             std::uint64_t seed);

struct FittedModel {
  ModelParams params;
  std::optional<RatioModel> ratio;
  std::optional<FwlrTrace> trace;
};

/// Trains `method` at a fixed lambda_beta on `train`. SMOTE is applied to
/// `train` inside this call, so callers pass un-resampled rows.
FittedModel fit_method(Method method, const Dataset& train, double lambda_beta, const ExperimentConfig& config,
                       std::uint64_t seed);

struct TrialResult {
  std::string dataset;
  Method method = Method::kLogistic;
  int trial = 0;
  std::uint64_t seed = 0;
  Hyperparameters hyperparameters;
  double auc = 0.0;
  double f_measure = 0.0;
  double accuracy = 0.0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;
};

/// Normalized train/test data for one trial.
struct TrialData {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

/// Loads (or generates) the configured dataset. CSV sources only.
Dataset load_source(const ExperimentConfig& config);

/// Split, then normalize with statistics fit on the training rows.
/// `source` is ignored for synthetic configs (data are generated per trial).
TrialData prepare_trial(const ExperimentConfig& config, const Dataset* source, int trial);

struct MethodOutcome {
  TrialResult result;
  FittedModel model;
};

/// Grid search, final fit on all training rows, metrics on the test rows.
MethodOutcome evaluate_method(Method method, const TrialData& data, const ExperimentConfig& config, int trial);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

struct SummaryRow {
  std::string dataset;
  Method method = Method::kLogistic;
  int count = 0;
  int failures = 0;
  MetricSummary auc;
  MetricSummary f_measure;
  MetricSummary accuracy;
};

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> summary;
};

/// Runs every trial and method; per-trial fit failures are recorded with
/// failed = true and left out of the summary.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string trial_result_to_json(const TrialResult& result);
TrialResult trial_result_from_json(std::string_view line);
void write_trial_results(const std::vector<TrialResult>& results, const std::filesystem::path& path);
std::vector<TrialResult> read_trial_results(const std::filesystem::path& path);

}  // namespace skewfit
