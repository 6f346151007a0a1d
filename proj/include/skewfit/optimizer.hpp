#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace skewfit {

struct OptimizerSettings {
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
};

struct OptimizerReport {
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
  // Objective at the start point and after every accepted step.
  std::vector<double> objective_history;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// BFGS on the inverse Hessian with backtracking (Armijo) line search.
/// Iterates until ||grad|| <= gradient_tolerance or max_iterations. `x`
/// holds the start point on entry and the final iterate on return. Accepted
/// steps never increase the objective by more than 1e-13 * max(1, |f|), the
/// rounding band inside which a step is judged by its gradient instead.
OptimizerReport minimize_bfgs(const SmoothObjective& objective, Eigen::VectorXd& x,
                              const OptimizerSettings& settings);

}  // namespace skewfit
