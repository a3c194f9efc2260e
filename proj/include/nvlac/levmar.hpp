#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

// Small dense Levenberg-Marquardt solver for the handful of curve fits in
// this library (tens of parameters at most). Residuals and the analytic
// Jacobian are supplied by the caller.

namespace nvlac {

struct LevMarOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;   // relative cost decrease / step size / gradient
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double lambda_max = 1e12;
};

struct LevMarOutcome {
  Eigen::VectorXd parameters;
  double residual_norm = 0.0;  // sqrt(sum of squared residuals)
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^-1; empty when singular
  bool covariance_ok = false;
};

// model(p, r, J): fill residuals r (fixed length m) and, when J is not
// null, the m x n Jacobian dr/dp.
using LevMarModel =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>;

inline LevMarOutcome levmar_solve(const LevMarModel& model, Eigen::VectorXd p0, int m,
                                  const LevMarOptions& opts = {}) {
  const int n = static_cast<int>(p0.size());
  if (m < n) throw std::invalid_argument("levmar_solve: fewer residuals than parameters");

  Eigen::VectorXd p = std::move(p0);
  Eigen::VectorXd r(m);
  Eigen::MatrixXd jac(m, n);
  model(p, r, &jac);
  double cost = r.squaredNorm();

  double lambda = opts.lambda_init;
  bool converged = false;
  int iter = 0;

  for (; iter < opts.max_iterations && !converged; ++iter) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;

    if (grad.lpNorm<Eigen::Infinity>() < opts.tolerance * (1.0 + std::sqrt(cost))) {
      converged = true;
      break;
    }

    bool step_taken = false;
    while (lambda <= opts.lambda_max) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= opts.lambda_up;
        continue;
      }

      const Eigen::VectorXd p_try = p + step;
      Eigen::VectorXd r_try(m);
      model(p_try, r_try, nullptr);
      const double cost_try = r_try.squaredNorm();

      if (std::isfinite(cost_try) && cost_try <= cost) {
        const double improvement = (cost - cost_try) / std::max(cost, 1e-300);
        p = p_try;
        model(p, r, &jac);
        cost = r.squaredNorm();
        lambda = std::max(lambda * opts.lambda_down, 1e-12);
        step_taken = true;
        // A negligible gain from an undamped (Gauss-Newton-like) step means
        // the minimum is resolved to working precision.
        converged = improvement < opts.tolerance && lambda <= opts.lambda_init;
        break;
      }
      lambda *= opts.lambda_up;
    }

    // Damping exhausted without an acceptable step: the iterate is at a
    // numerical stationary point.
    if (!step_taken) {
      converged = true;
      break;
    }
  }

  LevMarOutcome out;
  out.parameters = p;
  out.residual_norm = std::sqrt(cost);
  out.iterations = iter;
  out.converged = converged;

  // Covariance from the final Jacobian: sigma^2 (J^T J)^-1 with
  // sigma^2 = SSR / (m - n). Skipped when the normal matrix is singular.
  if (m > n) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      const double sigma2 = cost / static_cast<double>(m - n);
      out.covariance = sigma2 * lu.inverse();
      out.covariance_ok = out.covariance.allFinite();
    }
  }
  return out;
}

}  // namespace nvlac
