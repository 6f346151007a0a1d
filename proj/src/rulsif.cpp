#include "skewfit/rulsif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "skewfit/data.hpp"
#include "skewfit/rng.hpp"

namespace skewfit {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("kernel width sigma must be positive and finite");
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " must be finite");
    }
  }
}

void check_labels(std::span<const double> labels) {
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
}

double numerator_share(double alpha, AlphaPlacement placement) {
  return placement == AlphaPlacement::kAsPrinted ? alpha : 1.0 - alpha;
}

Eigen::MatrixXd kernel_matrix(std::span<const double> rows, std::span<const double> centers, double sigma) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(centers.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel(rows[i], centers[j], sigma);
    }
  }
  return k;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& fold, std::size_t n) {
  std::vector<bool> held(n, false);
  for (std::size_t i : fold) {
    held[i] = true;
  }
  std::vector<std::size_t> rest;
  rest.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) {
      rest.push_back(i);
    }
  }
  return rest;
}

}  // namespace

double kernel(double p, double c, double sigma) {
  check_sigma(sigma);
  const double diff = p - c;
  return std::exp(-diff * diff / (2.0 * sigma));
}

RatioDesign build_design(std::span<const double> scores, std::span<const double> labels, double sigma,
                         double alpha, AlphaPlacement placement) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  check_labels(labels);
  for (double p : scores) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("scores must lie in [0, 1]");
    }
  }
  return build_design(scores, scores, labels, sigma, alpha, placement);
}

RatioDesign build_design(std::span<const double> centers, std::span<const double> numerator,
                         std::span<const double> reference, double sigma, double alpha,
                         AlphaPlacement placement) {
  if (centers.empty() || numerator.empty() || reference.empty()) {
    throw std::invalid_argument("build_design: empty input");
  }
  check_sigma(sigma);
  check_alpha(alpha);
  check_finite(centers, "centers");
  check_finite(numerator, "numerator samples");
  check_finite(reference, "reference samples");

  const double share = numerator_share(alpha, placement);
  const Eigen::MatrixXd k_num = kernel_matrix(numerator, centers, sigma);
  const Eigen::MatrixXd k_ref = kernel_matrix(reference, centers, sigma);
  const auto n_num = static_cast<double>(numerator.size());
  const auto n_ref = static_cast<double>(reference.size());

  RatioDesign design;
  design.H = (share / n_num) * (k_num.transpose() * k_num) +
             ((1.0 - share) / n_ref) * (k_ref.transpose() * k_ref);
  // Symmetrize away the rounding asymmetry of the two products.
  design.H = 0.5 * (design.H + design.H.transpose()).eval();
  design.h = k_num.colwise().sum().transpose() / n_num;
  return design;
}

Eigen::VectorXd solve_theta(const RatioDesign& design, double lambda_theta) {
  if (!(lambda_theta >= 0.0) || !std::isfinite(lambda_theta)) {
    throw std::invalid_argument("lambda_theta must be finite and non-negative");
  }
  const Eigen::Index n = design.h.size();
  if (design.H.rows() != n || design.H.cols() != n) {
    throw std::invalid_argument("design dimensions disagree");
  }
  const Eigen::MatrixXd system = design.H + lambda_theta * Eigen::MatrixXd::Identity(n, n);
  if (lambda_theta > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) {
      return llt.solve(design.h);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  // rcond() treats zero pivots as a pseudo-inverse, so look at D directly.
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || n == 0 || pivots.minCoeff() <= 1e-14 * pivots.maxCoeff() ||
      ldlt.rcond() < 1e-14) {
    throw std::runtime_error("solve_theta: H + lambda I is singular");
  }
  return ldlt.solve(design.h);
}

WeightEvaluation evaluate_weights(const RatioModel& model, std::span<const double> scores) {
  check_sigma(model.sigma);
  if (model.centers.size() != model.theta.size()) {
    throw std::invalid_argument("ratio model centers and theta differ in length");
  }
  WeightEvaluation out;
  out.weights.resize(static_cast<Eigen::Index>(scores.size()));
  std::size_t clipped = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    double w = 0.0;
    for (Eigen::Index l = 0; l < model.centers.size(); ++l) {
      w += model.theta(l) * kernel(scores[j], model.centers(l), model.sigma);
    }
    if (w < 0.0) {
      w = 0.0;
      ++clipped;
    }
    out.weights(static_cast<Eigen::Index>(j)) = w;
  }
  out.clip_rate = scores.empty() ? 0.0 : static_cast<double>(clipped) / static_cast<double>(scores.size());
  return out;
}

KernelFactor::KernelFactor(std::span<const double> points, double sigma, double tolerance) {
  check_sigma(sigma);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd residual = Eigen::VectorXd::Ones(n);
  std::vector<Eigen::VectorXd> columns;
  Eigen::VectorXd pivot_row;
  while (static_cast<Eigen::Index>(columns.size()) < n) {
    Eigen::Index pivot = 0;
    const double largest = residual.maxCoeff(&pivot);
    if (!(largest > tolerance)) {
      break;
    }
    const auto k = static_cast<Eigen::Index>(columns.size());
    pivot_row.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      pivot_row(c) = columns[static_cast<std::size_t>(c)](pivot);
    }
    Eigen::VectorXd col(n);
    const double xp = points[static_cast<std::size_t>(pivot)];
    for (Eigen::Index i = 0; i < n; ++i) {
      col(i) = kernel(points[static_cast<std::size_t>(i)], xp, sigma);
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      col -= pivot_row(c) * columns[static_cast<std::size_t>(c)];
    }
    col /= std::sqrt(largest);
    residual -= col.cwiseAbs2();
    residual(pivot) = 0.0;
    columns.push_back(std::move(col));
  }
  factor_.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    factor_.col(static_cast<Eigen::Index>(c)) = columns[c];
  }
}

RatioSolver::RatioSolver(std::span<const double> centers, std::span<const double> numerator,
                         std::span<const double> reference, double sigma, double alpha,
                         AlphaPlacement placement) {
  if (centers.empty() || numerator.empty() || reference.empty()) {
    throw std::invalid_argument("RatioSolver: empty input");
  }
  check_alpha(alpha);
  check_finite(centers, "centers");
  check_finite(numerator, "numerator samples");
  check_finite(reference, "reference samples");
  numerator_share_ = numerator_share(alpha, placement);

  std::vector<double> unique(centers.begin(), centers.end());
  unique.insert(unique.end(), numerator.begin(), numerator.end());
  unique.insert(unique.end(), reference.begin(), reference.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  auto index_of = [&](double v) {
    return static_cast<Eigen::Index>(std::lower_bound(unique.begin(), unique.end(), v) - unique.begin());
  };

  unique_factor_ = KernelFactor(unique, sigma).factor();
  const Eigen::Index rank = unique_factor_.cols();
  center_factor_.resize(static_cast<Eigen::Index>(centers.size()), rank);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    center_factor_.row(static_cast<Eigen::Index>(i)) = unique_factor_.row(index_of(centers[i]));
  }
  numerator_index_.reserve(numerator.size());
  for (double v : numerator) {
    numerator_index_.push_back(index_of(v));
  }
  reference_index_.reserve(reference.size());
  for (double v : reference) {
    reference_index_.push_back(index_of(v));
  }

  const Eigen::Index n_centers = center_factor_.rows();
  const Eigen::Index thin = std::min(n_centers, rank);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(center_factor_);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(n_centers, thin);
  r_ = qr.matrixQR().topRows(thin).triangularView<Eigen::Upper>();
}

RatioSolver::Moments RatioSolver::moments(std::span<const std::size_t> numerator_rows,
                                          std::span<const std::size_t> reference_rows) const {
  if (numerator_rows.empty() || reference_rows.empty()) {
    throw std::invalid_argument("RatioSolver::moments: empty sample subset");
  }
  const Eigen::Index n_unique = unique_factor_.rows();
  Eigen::VectorXd second_weight = Eigen::VectorXd::Zero(n_unique);
  Eigen::VectorXd first_weight = Eigen::VectorXd::Zero(n_unique);
  const double num_scale = 1.0 / static_cast<double>(numerator_rows.size());
  const double ref_scale = 1.0 / static_cast<double>(reference_rows.size());
  for (std::size_t row : numerator_rows) {
    const Eigen::Index u = numerator_index_.at(row);
    second_weight(u) += numerator_share_ * num_scale;
    first_weight(u) += num_scale;
  }
  for (std::size_t row : reference_rows) {
    second_weight(reference_index_.at(row)) += (1.0 - numerator_share_) * ref_scale;
  }
  Moments m;
  m.second.noalias() = unique_factor_.transpose() * second_weight.asDiagonal() * unique_factor_;
  m.first.noalias() = unique_factor_.transpose() * first_weight;
  return m;
}

RatioSolver::Moments RatioSolver::all_moments() const {
  std::vector<std::size_t> num(numerator_index_.size());
  std::vector<std::size_t> ref(reference_index_.size());
  for (std::size_t i = 0; i < num.size(); ++i) num[i] = i;
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = i;
  return moments(num, ref);
}

Eigen::VectorXd RatioSolver::solve(const Moments& m, double lambda_theta) const {
  if (!(lambda_theta >= 0.0) || !std::isfinite(lambda_theta)) {
    throw std::invalid_argument("lambda_theta must be finite and non-negative");
  }
  Eigen::MatrixXd system = r_ * m.second * r_.transpose();
  system = 0.5 * (system + system.transpose()).eval();
  system.diagonal().array() += lambda_theta;
  const Eigen::VectorXd rhs = r_ * m.first;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  if (ldlt.info() != Eigen::Success || (lambda_theta == 0.0 && ldlt.rcond() < 1e-14)) {
    throw std::runtime_error("RatioSolver: H + lambda I is singular");
  }
  return ldlt.solve(rhs);
}

Eigen::VectorXd RatioSolver::theta(const Eigen::VectorXd& coords) const { return q_ * coords; }

double RatioSolver::objective(const Eigen::VectorXd& coords, const Moments& m) const {
  const Eigen::VectorXd u = r_.transpose() * coords;
  return 0.5 * u.dot(m.second * u) - m.first.dot(u);
}

Eigen::VectorXd RatioSolver::numerator_weights(const Eigen::VectorXd& coords) const {
  const Eigen::VectorXd u = r_.transpose() * coords;
  const Eigen::VectorXd per_unique = unique_factor_ * u;
  Eigen::VectorXd out(static_cast<Eigen::Index>(numerator_index_.size()));
  for (std::size_t i = 0; i < numerator_index_.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = per_unique(numerator_index_[i]);
  }
  return out;
}

RatioFit fit_ratio(std::span<const double> scores, std::span<const double> labels,
                   const RatioFitOptions& options) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  check_labels(labels);
  return fit_ratio_samples(scores, labels, options);
}

RatioFit fit_ratio_samples(std::span<const double> numerator, std::span<const double> reference,
                           const RatioFitOptions& options) {
  if (options.sigma_grid.empty() || options.lambda_grid.empty()) {
    throw std::invalid_argument("fit_ratio: grids must be non-empty");
  }
  if (options.folds < 2) {
    throw std::invalid_argument("fit_ratio: need at least two folds");
  }
  if (numerator.size() < 2 || reference.size() < 2) {
    throw std::invalid_argument("fit_ratio: need at least two samples of each kind");
  }
  check_alpha(options.alpha);

  RatioFit result;
  double best_sigma = options.sigma_grid.front();
  double best_lambda = options.lambda_grid.front();
  const bool single_cell = options.sigma_grid.size() == 1 && options.lambda_grid.size() == 1;

  if (!single_cell) {
    const bool paired = numerator.size() == reference.size();
    const std::size_t k_num = std::min(options.folds, numerator.size());
    const std::size_t k_ref = std::min(options.folds, reference.size());
    const std::size_t k = std::min(k_num, k_ref);
    const Folds num_folds = kfold_indices(numerator.size(), k, options.seed);
    const Folds ref_folds =
        paired ? num_folds : kfold_indices(reference.size(), k, derive_seed(options.seed, 1));

    double best = std::numeric_limits<double>::infinity();
    for (double sigma : options.sigma_grid) {
      check_sigma(sigma);
      const RatioSolver solver(numerator, numerator, reference, sigma, options.alpha, options.placement);
      std::vector<double> totals(options.lambda_grid.size(), 0.0);
      for (std::size_t f = 0; f < k; ++f) {
        const auto num_train = complement(num_folds[f], numerator.size());
        const auto ref_train = complement(ref_folds[f], reference.size());
        const auto train = solver.moments(num_train, ref_train);
        const auto held = solver.moments(num_folds[f], ref_folds[f]);
        for (std::size_t l = 0; l < options.lambda_grid.size(); ++l) {
          const Eigen::VectorXd coords = solver.solve(train, options.lambda_grid[l]);
          totals[l] += solver.objective(coords, held);
        }
      }
      for (std::size_t l = 0; l < options.lambda_grid.size(); ++l) {
        const double mean = totals[l] / static_cast<double>(k);
        result.cells.push_back({sigma, options.lambda_grid[l], mean});
        if (mean < best) {
          best = mean;
          best_sigma = sigma;
          best_lambda = options.lambda_grid[l];
        }
      }
    }
    result.cv_score = best;
  }

  const RatioSolver solver(numerator, numerator, reference, best_sigma, options.alpha, options.placement);
  const Eigen::VectorXd coords = solver.solve(solver.all_moments(), best_lambda);
  result.model.centers = Eigen::Map<const Eigen::VectorXd>(numerator.data(),
                                                           static_cast<Eigen::Index>(numerator.size()));
  result.model.theta = solver.theta(coords);
  result.model.sigma = best_sigma;
  result.model.alpha = options.alpha;
  result.model.lambda_theta = best_lambda;
  result.model.placement = options.placement;
  result.sample_weights = solver.numerator_weights(coords);
  return result;
}

std::string ratio_model_to_json(const RatioModel& model) {
  nlohmann::json doc;
  doc["centers"] = std::vector<double>(model.centers.begin(), model.centers.end());
  doc["theta"] = std::vector<double>(model.theta.begin(), model.theta.end());
  doc["sigma"] = model.sigma;
  doc["alpha"] = model.alpha;
  doc["lambda_theta"] = model.lambda_theta;
  doc["alpha_swapped"] = model.placement == AlphaPlacement::kSwapped;
  return doc.dump();
}

RatioModel ratio_model_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    RatioModel model;
    const auto centers = doc.at("centers").get<std::vector<double>>();
    const auto theta = doc.at("theta").get<std::vector<double>>();
    if (centers.size() != theta.size()) {
      throw std::runtime_error("ratio model json: centers and theta differ in length");
    }
    model.centers = Eigen::Map<const Eigen::VectorXd>(centers.data(), static_cast<Eigen::Index>(centers.size()));
    model.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    model.sigma = doc.at("sigma").get<double>();
    model.alpha = doc.at("alpha").get<double>();
    model.lambda_theta = doc.at("lambda_theta").get<double>();
    model.placement = doc.value("alpha_swapped", false) ? AlphaPlacement::kSwapped : AlphaPlacement::kAsPrinted;
    check_sigma(model.sigma);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("ratio model json: ") + e.what());
  }
}

}  // namespace skewfit
