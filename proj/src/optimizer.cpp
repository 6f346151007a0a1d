#include "skewfit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skewfit {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kRoundoffBand = 1e-13;

}  // namespace

OptimizerReport minimize_bfgs(const SmoothObjective& objective, Eigen::VectorXd& x,
                              const OptimizerSettings& settings) {
  if (!(settings.gradient_tolerance > 0.0) || settings.max_iterations < 1) {
    throw std::invalid_argument("optimizer settings: tolerance must be > 0 and max_iterations >= 1");
  }
  const Eigen::Index dim = x.size();
  Eigen::VectorXd grad(dim);
  double f = objective(x, grad);
  if (!std::isfinite(f) || !grad.allFinite()) {
    throw std::runtime_error("objective is not finite at the start point");
  }

  OptimizerReport report;
  report.objective_history.push_back(f);
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);
  bool identity_hessian = true;
  Eigen::VectorXd x_new(dim);
  Eigen::VectorXd grad_new(dim);

  while (true) {
    const double gnorm = grad.norm();
    report.gradient_norm = gnorm;
    report.objective = f;
    if (gnorm <= settings.gradient_tolerance) {
      report.converged = true;
      break;
    }
    if (report.iterations >= settings.max_iterations) {
      break;
    }

    Eigen::VectorXd direction = -inv_hessian * grad;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      identity_hessian = true;
      direction = -grad;
      slope = -gnorm * gnorm;
    }

    double step = identity_hessian ? std::min(1.0, 1.0 / gnorm) : 1.0;
    bool accepted = false;
    double f_new = f;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      x_new = x + step * direction;
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new)) {
        const bool armijo = f_new <= f + kArmijo * step * slope;
        // Near the optimum the decrease can fall below rounding noise in f;
        // a step that shrinks the gradient without raising f beyond that
        // noise is still progress.
        const double noise = kRoundoffBand * std::max(1.0, std::abs(f));
        const bool roundoff = f_new <= f + noise && grad_new.norm() < gnorm;
        if (armijo || roundoff) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (identity_hessian) {
        break;
      }
      inv_hessian.setIdentity();
      identity_hessian = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (identity_hessian) {
        inv_hessian *= sy / y.squaredNorm();
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                     rho * (hy * s.transpose() + s * hy.transpose());
      identity_hessian = false;
    }

    x.swap(x_new);
    grad.swap(grad_new);
    f = f_new;
    report.objective_history.push_back(f);
    ++report.iterations;
  }
  return report;
}

}  // namespace skewfit
