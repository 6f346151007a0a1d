#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewfit/data.hpp"
#include "skewfit/glm.hpp"
#include "skewfit/metrics.hpp"
#include "skewfit/optimizer.hpp"
#include "skewfit/rulsif.hpp"

namespace skewfit {

/// Floor applied to every training weight after clipping.
inline constexpr double kWeightFloor = 1e-6;

struct FwlrConfig {
  double alpha = 0.5;
  // Stop once ||beta - beta_prev||^2 < epsilon.
  double epsilon = 1e-6;
  int max_outer_iterations = 100;
  double lambda_beta = 0.1;
  std::vector<double> lambda_theta_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<double> sigma_grid{0.01, 0.1, 1.0, 10.0};
  std::size_t ratio_folds = 5;
  OptimizerSettings inner;
  std::uint64_t seed = 0;
  // false: (sigma, lambda_theta) are chosen by CV on the first pass only.
  bool reselect_each_iteration = true;
  bool include_intercept = true;
  // Scale weights to mean 1 before each weighted fit.
  bool renormalize_weights = true;
  AlphaPlacement placement = AlphaPlacement::kAsPrinted;
};

struct FwlrIteration {
  int iteration = 0;
  double step_squared = 0.0;
  double weighted_loss = 0.0;
  double weight_mean = 0.0;  // before renormalization
  double weight_min = 0.0;   // of the weights used in the fit
  double weight_max = 0.0;
  double clip_rate = 0.0;
  double sigma = 0.0;
  double lambda_theta = 0.0;
  double ratio_cv_score = 0.0;
  bool inner_converged = false;
  int inner_iterations = 0;
};

struct FwlrTrace {
  std::vector<FwlrIteration> iterations;
  bool converged = false;

  /// One JSON object per outer iteration, newline separated.
  std::string to_json_lines() const;
};

struct FwlrResult {
  ModelParams params;
  RatioModel ratio;
  FwlrTrace trace;
  Eigen::VectorXd weights;  // weights used in the last weighted fit
};

/// Turns raw ratio-model outputs into training weights: clip at 0, floor at
/// kWeightFloor, optionally rescale to mean 1 (then floor again).
/// `raw_mean` receives the mean after clipping.
SampleWeights training_weights(const Eigen::VectorXd& raw, bool renormalize, double* raw_mean = nullptr,
                               double* clip_rate = nullptr);

/// Alternates a weighted logistic fit with a relative density-ratio fit on
/// the current (score, label) pairs, starting from the unweighted fit.
FwlrResult fit_fwlr(const Dataset& data, const FwlrConfig& config);

/// Model scores paired with the dataset labels.
ScoredLabels predict(const ModelParams& model, const Dataset& data);

}  // namespace skewfit
