#include "skewfit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace skewfit {

namespace {

constexpr double kProbabilityFloor = 1e-12;

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_dimension(const ModelParams& params, Eigen::Index cols) {
  if (params.feature_count() != cols) {
    throw std::invalid_argument("model has " + std::to_string(params.feature_count()) +
                                " features but data has " + std::to_string(cols));
  }
}

void check_weights(const Dataset& data, const SampleWeights& weights) {
  if (weights.size() != data.rows()) {
    throw std::invalid_argument("weight count does not match row count");
  }
}

// X^T v with the optional leading intercept entry.
Eigen::VectorXd augmented_transpose_times(const ModelParams& params, const Eigen::MatrixXd& features,
                                          const Eigen::VectorXd& v) {
  Eigen::VectorXd out(params.beta.size());
  if (params.include_intercept) {
    out(0) = v.sum();
    out.tail(features.cols()).noalias() = features.transpose() * v;
  } else {
    out.noalias() = features.transpose() * v;
  }
  return out;
}

double weighted_loss(const ModelParams& params, const Dataset& data, const Eigen::VectorXd& w) {
  check_dimension(params, data.cols());
  const Eigen::VectorXd eta = linear_predictors(params, data.features);
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w(i) != 0.0) {
      total += w(i) * (softplus(eta(i)) - data.labels(i) * eta(i));
    }
  }
  return total + params.lambda_beta * params.beta.squaredNorm();
}

Eigen::VectorXd weighted_gradient(const ModelParams& params, const Dataset& data, const Eigen::VectorXd& w) {
  check_dimension(params, data.cols());
  const Eigen::VectorXd eta = linear_predictors(params, data.features);
  Eigen::VectorXd residual(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    residual(i) = w(i) * (sigmoid(eta(i)) - data.labels(i));
  }
  return augmented_transpose_times(params, data.features, residual) + 2.0 * params.lambda_beta * params.beta;
}

ModelParams start_point(const Dataset& data, const GlmOptions& options) {
  if (options.lambda_beta < 0.0 || !std::isfinite(options.lambda_beta)) {
    throw std::invalid_argument("lambda_beta must be finite and non-negative");
  }
  ModelParams params;
  params.include_intercept = options.include_intercept;
  params.lambda_beta = options.lambda_beta;
  params.beta = Eigen::VectorXd::Zero(data.cols() + (options.include_intercept ? 1 : 0));
  params.feature_names = data.feature_names;
  return params;
}

FitResult fit_weighted(const Dataset& data, const GlmOptions& options, const Eigen::VectorXd& w) {
  require_two_classes(data, "logistic fit");
  FitResult result;
  result.params = start_point(data, options);
  ModelParams probe = result.params;
  auto objective = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& grad) {
    probe.beta = beta;
    grad = weighted_gradient(probe, data, w);
    return weighted_loss(probe, data, w);
  };
  Eigen::VectorXd beta = result.params.beta;
  result.report = minimize_bfgs(objective, beta, options.optimizer);
  result.params.beta = std::move(beta);
  result.params.fitted = true;
  return result;
}

}  // namespace

SampleWeights::SampleWeights(Eigen::VectorXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    throw std::invalid_argument("sample weights must be finite");
  }
  if (values_.size() > 0 && values_.minCoeff() < 0.0) {
    throw std::invalid_argument("sample weights must be non-negative");
  }
  if (values_.size() == 0 || values_.maxCoeff() == 0.0) {
    throw std::invalid_argument("sample weights must not all be zero");
  }
}

SampleWeights SampleWeights::ones(Eigen::Index n) { return SampleWeights(Eigen::VectorXd::Ones(n)); }

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear_predictor(const ModelParams& params, const Eigen::VectorXd& x) {
  check_dimension(params, x.size());
  if (params.include_intercept) {
    return params.beta(0) + params.beta.tail(x.size()).dot(x);
  }
  return params.beta.dot(x);
}

Eigen::VectorXd linear_predictors(const ModelParams& params, const Eigen::MatrixXd& features) {
  check_dimension(params, features.cols());
  if (params.include_intercept) {
    Eigen::VectorXd eta = features * params.beta.tail(features.cols());
    eta.array() += params.beta(0);
    return eta;
  }
  return features * params.beta;
}

double score(const ModelParams& params, const Eigen::VectorXd& x) {
  return std::clamp(sigmoid(linear_predictor(params, x)), kProbabilityFloor, 1.0 - kProbabilityFloor);
}

Eigen::VectorXd scores(const ModelParams& params, const Eigen::MatrixXd& features) {
  // Row by row so batch and single-row scores agree bit for bit.
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out(i) = score(params, features.row(i).transpose());
  }
  return out;
}

double cross_entropy(const ModelParams& params, const Dataset& data) {
  return weighted_loss(params, data, Eigen::VectorXd::Ones(data.rows()));
}

double weighted_cross_entropy(const ModelParams& params, const Dataset& data, const SampleWeights& weights) {
  check_weights(data, weights);
  return weighted_loss(params, data, weights.values());
}

Eigen::VectorXd gradient(const ModelParams& params, const Dataset& data) {
  return weighted_gradient(params, data, Eigen::VectorXd::Ones(data.rows()));
}

Eigen::VectorXd gradient(const ModelParams& params, const Dataset& data, const SampleWeights& weights) {
  check_weights(data, weights);
  return weighted_gradient(params, data, weights.values());
}

FitResult fit(const Dataset& data, const GlmOptions& options) {
  return fit_weighted(data, options, Eigen::VectorXd::Ones(data.rows()));
}

FitResult fit(const Dataset& data, const GlmOptions& options, const SampleWeights& weights) {
  check_weights(data, weights);
  return fit_weighted(data, options, weights.values());
}

SampleWeights cost_sensitive_weights(const Dataset& data) {
  require_two_classes(data, "cost_sensitive_weights");
  const double n = static_cast<double>(data.rows());
  const double w_pos = n / (2.0 * static_cast<double>(data.positives()));
  const double w_neg = n / (2.0 * static_cast<double>(data.negatives()));
  Eigen::VectorXd w(data.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w(i) = data.labels(i) == 1.0 ? w_pos : w_neg;
  }
  return SampleWeights(std::move(w));
}

double soft_f_from_scores(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels) {
  if (probabilities.size() != labels.size()) {
    throw std::invalid_argument("soft F: length mismatch");
  }
  const double denominator = probabilities.sum() + labels.sum();
  if (denominator == 0.0) {
    return 0.0;
  }
  return 2.0 * probabilities.dot(labels) / denominator;
}

double soft_f_objective(const ModelParams& params, const Dataset& data) {
  check_dimension(params, data.cols());
  Eigen::VectorXd p = linear_predictors(params, data.features);
  for (auto& v : p) {
    v = sigmoid(v);
  }
  return soft_f_from_scores(p, data.labels) - params.lambda_beta * params.beta.squaredNorm();
}

Eigen::VectorXd soft_f_gradient(const ModelParams& params, const Dataset& data) {
  check_dimension(params, data.cols());
  Eigen::VectorXd p = linear_predictors(params, data.features);
  for (auto& v : p) {
    v = sigmoid(v);
  }
  const double matched = p.dot(data.labels);
  const double denominator = p.sum() + data.labels.sum();
  // d/d eta_i of 2A/B with A = sum p y, B = sum p + n_p.
  Eigen::VectorXd coef(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    coef(i) = 2.0 * p(i) * (1.0 - p(i)) * (data.labels(i) * denominator - matched) /
              (denominator * denominator);
  }
  return augmented_transpose_times(params, data.features, coef) - 2.0 * params.lambda_beta * params.beta;
}

FitResult fit_soft_f(const Dataset& data, const GlmOptions& options) {
  validate(data);
  if (data.positives() == 0) {
    throw std::invalid_argument("fit_soft_f: no positive samples");
  }
  FitResult result;
  result.params = start_point(data, options);
  ModelParams probe = result.params;
  auto objective = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& grad) {
    probe.beta = beta;
    grad = -soft_f_gradient(probe, data);
    return -soft_f_objective(probe, data);
  };
  Eigen::VectorXd beta = result.params.beta;
  result.report = minimize_bfgs(objective, beta, options.optimizer);
  result.params.beta = std::move(beta);
  result.params.fitted = true;
  return result;
}

std::string model_to_json(const ModelParams& params) {
  nlohmann::json doc;
  doc["beta"] = std::vector<double>(params.beta.begin(), params.beta.end());
  doc["lambda_beta"] = params.lambda_beta;
  doc["include_intercept"] = params.include_intercept;
  doc["feature_names"] = params.feature_names;
  return doc.dump();
}

ModelParams model_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    ModelParams params;
    const auto beta = doc.at("beta").get<std::vector<double>>();
    params.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    params.lambda_beta = doc.at("lambda_beta").get<double>();
    params.include_intercept = doc.at("include_intercept").get<bool>();
    params.feature_names = doc.value("feature_names", std::vector<std::string>{});
    params.fitted = true;
    if (!params.beta.allFinite() || params.lambda_beta < 0.0) {
      throw std::runtime_error("model json: beta must be finite and lambda_beta non-negative");
    }
    if (params.include_intercept && params.beta.size() == 0) {
      throw std::runtime_error("model json: intercept model needs a non-empty beta");
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model json: ") + e.what());
  }
}

}  // namespace skewfit
