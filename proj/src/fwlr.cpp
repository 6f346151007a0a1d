#include "skewfit/fwlr.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace skewfit {

SampleWeights training_weights(const Eigen::VectorXd& raw, bool renormalize, double* raw_mean,
                               double* clip_rate) {
  if (raw.size() == 0) {
    throw std::invalid_argument("training_weights: empty input");
  }
  Eigen::VectorXd w = raw;
  Eigen::Index clipped = 0;
  for (auto& v : w) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("ratio model produced a non-finite weight");
    }
    if (v < 0.0) {
      v = 0.0;
      ++clipped;
    }
  }
  if (raw_mean != nullptr) {
    *raw_mean = w.mean();
  }
  if (clip_rate != nullptr) {
    *clip_rate = static_cast<double>(clipped) / static_cast<double>(w.size());
  }
  w = w.cwiseMax(kWeightFloor);
  if (renormalize) {
    w /= w.mean();
    w = w.cwiseMax(kWeightFloor);
  }
  return SampleWeights(std::move(w));
}

FwlrResult fit_fwlr(const Dataset& data, const FwlrConfig& config) {
  require_two_classes(data, "fit_fwlr");
  if (!(config.epsilon > 0.0)) {
    throw std::invalid_argument("fit_fwlr: epsilon must be positive");
  }
  if (config.max_outer_iterations < 1) {
    throw std::invalid_argument("fit_fwlr: max_outer_iterations must be >= 1");
  }

  GlmOptions glm_options;
  glm_options.lambda_beta = config.lambda_beta;
  glm_options.include_intercept = config.include_intercept;
  glm_options.optimizer = config.inner;

  FwlrResult result;
  result.params = fit(data, glm_options).params;

  RatioFitOptions ratio_options;
  ratio_options.alpha = config.alpha;
  ratio_options.sigma_grid = config.sigma_grid;
  ratio_options.lambda_grid = config.lambda_theta_grid;
  ratio_options.folds = config.ratio_folds;
  ratio_options.seed = config.seed;
  ratio_options.placement = config.placement;

  const std::span<const double> labels(data.labels.data(), static_cast<std::size_t>(data.labels.size()));
  for (int it = 1; it <= config.max_outer_iterations; ++it) {
    const Eigen::VectorXd previous = result.params.beta;
    const Eigen::VectorXd p = scores(result.params, data.features);
    const std::span<const double> score_span(p.data(), static_cast<std::size_t>(p.size()));

    RatioFitOptions pass_options = ratio_options;
    if (it > 1 && !config.reselect_each_iteration) {
      pass_options.sigma_grid = {result.ratio.sigma};
      pass_options.lambda_grid = {result.ratio.lambda_theta};
    }
    RatioFit ratio = fit_ratio(score_span, labels, pass_options);

    FwlrIteration record;
    record.iteration = it;
    const SampleWeights weights =
        training_weights(ratio.sample_weights, config.renormalize_weights, &record.weight_mean, &record.clip_rate);
    const FitResult refit = fit(data, glm_options, weights);

    record.step_squared = (refit.params.beta - previous).squaredNorm();
    record.weighted_loss = refit.report.objective;
    record.weight_min = weights.values().minCoeff();
    record.weight_max = weights.values().maxCoeff();
    record.sigma = ratio.model.sigma;
    record.lambda_theta = ratio.model.lambda_theta;
    record.ratio_cv_score = ratio.cv_score;
    record.inner_converged = refit.report.converged;
    record.inner_iterations = refit.report.iterations;

    result.params = refit.params;
    result.ratio = std::move(ratio.model);
    result.weights = weights.values();
    result.trace.iterations.push_back(record);
    if (record.step_squared < config.epsilon) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

std::string FwlrTrace::to_json_lines() const {
  std::string out;
  for (const auto& r : iterations) {
    nlohmann::json doc;
    doc["iteration"] = r.iteration;
    doc["step_squared"] = r.step_squared;
    doc["weighted_loss"] = r.weighted_loss;
    doc["weight_mean"] = r.weight_mean;
    doc["weight_min"] = r.weight_min;
    doc["weight_max"] = r.weight_max;
    doc["clip_rate"] = r.clip_rate;
    doc["sigma"] = r.sigma;
    doc["lambda_theta"] = r.lambda_theta;
    doc["ratio_cv_score"] = r.ratio_cv_score;
    doc["inner_converged"] = r.inner_converged;
    doc["inner_iterations"] = r.inner_iterations;
    out += doc.dump();
    out += '\n';
  }
  return out;
}

ScoredLabels predict(const ModelParams& model, const Dataset& data) {
  const Eigen::VectorXd p = scores(model, data.features);
  ScoredLabels out;
  out.scores.assign(p.begin(), p.end());
  out.labels.reserve(static_cast<std::size_t>(data.labels.size()));
  for (double y : data.labels) {
    out.labels.push_back(static_cast<int>(y));
  }
  return out;
}

}  // namespace skewfit
