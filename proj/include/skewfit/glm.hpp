#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "skewfit/data.hpp"
#include "skewfit/optimizer.hpp"

namespace skewfit {

/// Logistic-regression coefficients.
///
/// With `include_intercept`, beta has d + 1 entries and beta[0] multiplies a
/// constant 1; otherwise beta has d entries. The penalty covers every entry,
/// intercept included.
struct ModelParams {
  Eigen::VectorXd beta;
  double lambda_beta = 0.0;
  bool fitted = false;
  bool include_intercept = true;
  std::vector<std::string> feature_names;

  Eigen::Index feature_count() const { return beta.size() - (include_intercept ? 1 : 0); }
};

/// Non-negative, finite per-sample loss multipliers, not all zero.
class SampleWeights {
 public:
  /// Throws std::invalid_argument if the invariants are violated.
  explicit SampleWeights(Eigen::VectorXd values);

  static SampleWeights ones(Eigen::Index n);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
};

struct GlmOptions {
  double lambda_beta = 0.0;
  bool include_intercept = true;
  OptimizerSettings optimizer;
};

struct FitResult {
  ModelParams params;
  OptimizerReport report;
};

/// Logistic function, overflow-safe in both tails.
double sigmoid(double z);

/// beta^T x (plus intercept).
double linear_predictor(const ModelParams& params, const Eigen::VectorXd& x);
Eigen::VectorXd linear_predictors(const ModelParams& params, const Eigen::MatrixXd& features);

/// P(y = 1 | x), clamped to [1e-12, 1 - 1e-12].
double score(const ModelParams& params, const Eigen::VectorXd& x);
Eigen::VectorXd scores(const ModelParams& params, const Eigen::MatrixXd& features);

/// -sum[y log p + (1 - y) log(1 - p)] + lambda ||beta||^2, evaluated through
/// log1p(exp(.)) so no probability is ever rounded to 0 or 1.
double cross_entropy(const ModelParams& params, const Dataset& data);
double weighted_cross_entropy(const ModelParams& params, const Dataset& data,
                              const SampleWeights& weights);

/// sum w_i (p_i - y_i) x_i + 2 lambda beta.
Eigen::VectorXd gradient(const ModelParams& params, const Dataset& data);
Eigen::VectorXd gradient(const ModelParams& params, const Dataset& data, const SampleWeights& weights);

/// Minimizes the (weighted) penalized cross-entropy from beta = 0.
/// Omitted weights are all ones. Rejects single-class data.
FitResult fit(const Dataset& data, const GlmOptions& options);
FitResult fit(const Dataset& data, const GlmOptions& options, const SampleWeights& weights);

/// w_i = n / (2 * count(class of y_i)); both classes sum to n / 2.
SampleWeights cost_sensitive_weights(const Dataset& data);

// Soft F-measure: TP is replaced by sum p_i y_i and the predicted-positive
// count by sum p_i, giving 2 sum p y / (sum p + sum y).
double soft_f_from_scores(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels);
/// Soft F minus lambda ||beta||^2 (to be maximized).
double soft_f_objective(const ModelParams& params, const Dataset& data);
Eigen::VectorXd soft_f_gradient(const ModelParams& params, const Dataset& data);
/// Gradient ascent on soft_f_objective (BFGS on its negation) from beta = 0.
FitResult fit_soft_f(const Dataset& data, const GlmOptions& options);

std::string model_to_json(const ModelParams& params);
/// Throws std::runtime_error on malformed input.
ModelParams model_from_json(std::string_view text);

}  // namespace skewfit
