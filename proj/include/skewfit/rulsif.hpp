#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace skewfit {

/// Which mixture component receives alpha in H.
enum class AlphaPlacement {
  kAsPrinted,  // alpha on the score term, (1 - alpha) on the label term
  kSwapped,    // (1 - alpha) on the score term, alpha on the label term
};

/// exp(-(p - c)^2 / (2 sigma)); sigma plays the role of a squared bandwidth.
double kernel(double p, double c, double sigma);

/// Quadratic model of the relative least-squares fit:
/// J(theta) = 1/2 theta^T H theta - h^T theta.
struct RatioDesign {
  Eigen::MatrixXd H;
  Eigen::VectorXd h;
};

/// H and h with the scores as kernel centers. `labels` must be 0/1 and
/// enter the kernel as real numbers.
RatioDesign build_design(std::span<const double> scores, std::span<const double> labels, double sigma,
                         double alpha, AlphaPlacement placement = AlphaPlacement::kAsPrinted);

/// General form: h averages K(numerator_i, c) and H mixes the numerator
/// and reference second moments with weights alpha and 1 - alpha.
RatioDesign build_design(std::span<const double> centers, std::span<const double> numerator,
                         std::span<const double> reference, double sigma, double alpha,
                         AlphaPlacement placement = AlphaPlacement::kAsPrinted);

/// theta = (H + lambda I)^{-1} h. Throws std::runtime_error if the system is
/// singular (possible only for lambda = 0).
Eigen::VectorXd solve_theta(const RatioDesign& design, double lambda_theta);

struct RatioModel {
  Eigen::VectorXd centers;
  Eigen::VectorXd theta;
  double sigma = 1.0;
  double alpha = 0.5;
  double lambda_theta = 0.0;
  AlphaPlacement placement = AlphaPlacement::kAsPrinted;
};

struct WeightEvaluation {
  Eigen::VectorXd weights;  // negative model outputs clipped to 0
  double clip_rate = 0.0;   // fraction of outputs that were clipped
};

/// w_j = sum_l theta_l K(score_j, center_l), clipped at zero.
WeightEvaluation evaluate_weights(const RatioModel& model, std::span<const double> scores);

/// Pivoted Cholesky factor of the Gaussian kernel matrix over 1-D points:
/// K(points_i, points_j) ~= (L L^T)_ij with every residual diagonal entry
/// below `tolerance`, so each entry is accurate to the same bound.
class KernelFactor {
 public:
  KernelFactor(std::span<const double> points, double sigma, double tolerance = 1e-13);

  const Eigen::MatrixXd& factor() const { return factor_; }
  Eigen::Index rank() const { return factor_.cols(); }

 private:
  Eigen::MatrixXd factor_;
};

/// Exact solver for a fixed (centers, samples, sigma, alpha) that evaluates
/// many (lambda, fold) combinations through the kernel factor. With
/// H = L_c S L_c^T and h = L_c s, and L_c = Q R, the ridge solution is
/// theta = Q (R S R^T + lambda I)^{-1} R s, so every solve is rank-sized.
class RatioSolver {
 public:
  struct Moments {
    Eigen::MatrixXd second;  // S
    Eigen::VectorXd first;   // s
  };

  RatioSolver(std::span<const double> centers, std::span<const double> numerator,
              std::span<const double> reference, double sigma, double alpha, AlphaPlacement placement);

  /// Moments of the given numerator / reference sample rows.
  Moments moments(std::span<const std::size_t> numerator_rows,
                  std::span<const std::size_t> reference_rows) const;
  Moments all_moments() const;

  /// Coordinates c with theta = Q c.
  Eigen::VectorXd solve(const Moments& m, double lambda_theta) const;
  Eigen::VectorXd theta(const Eigen::VectorXd& coords) const;
  /// 1/2 theta^T H theta - h^T theta with H, h from `m`.
  double objective(const Eigen::VectorXd& coords, const Moments& m) const;
  /// Unclipped model output at each numerator sample.
  Eigen::VectorXd numerator_weights(const Eigen::VectorXd& coords) const;

  Eigen::Index rank() const { return center_factor_.cols(); }
  std::size_t numerator_size() const { return numerator_index_.size(); }
  std::size_t reference_size() const { return reference_index_.size(); }

 private:
  double numerator_share_ = 0.5;  // coefficient on the numerator second moment
  Eigen::MatrixXd unique_factor_;  // rows: unique points
  Eigen::MatrixXd center_factor_;  // rows: centers
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  std::vector<Eigen::Index> numerator_index_;
  std::vector<Eigen::Index> reference_index_;
};

struct RatioFitOptions {
  double alpha = 0.5;
  std::vector<double> sigma_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<double> lambda_grid{0.01, 0.1, 1.0, 10.0};
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  AlphaPlacement placement = AlphaPlacement::kAsPrinted;
};

struct RatioCvCell {
  double sigma = 0.0;
  double lambda_theta = 0.0;
  double score = 0.0;  // mean held-out objective (lower is better)
};

struct RatioFit {
  RatioModel model;
  double cv_score = 0.0;
  std::vector<RatioCvCell> cells;
  Eigen::VectorXd sample_weights;  // unclipped model output at the scores
};

/// Chooses (sigma, lambda_theta) by k-fold held-out objective, then refits
/// on all pairs. Scores are the kernel centers; (score_i, label_i) pairs
/// stay together when folding. A single-cell grid skips cross-validation.
RatioFit fit_ratio(std::span<const double> scores, std::span<const double> labels,
                   const RatioFitOptions& options);

/// Same procedure for arbitrary real-valued samples in the label slot;
/// numerator samples are the centers. Equal-sized sets fold pairwise.
RatioFit fit_ratio_samples(std::span<const double> numerator, std::span<const double> reference,
                           const RatioFitOptions& options);

std::string ratio_model_to_json(const RatioModel& model);
RatioModel ratio_model_from_json(std::string_view text);

}  // namespace skewfit
