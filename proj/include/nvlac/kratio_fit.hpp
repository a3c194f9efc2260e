#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvlac/hamiltonian.hpp"
#include "nvlac/levmar.hpp"
#include "nvlac/pumping.hpp"
#include "nvlac/spin_system.hpp"

// Weighted single-parameter fit of the depolarization ratio k_eq0/Gamma to
// measured polarization-vs-field data. The parameter is fitted on a log
// scale, which keeps it positive without constraints.

namespace nvlac {

struct PolarizationDataPoint {
  double b_gauss = 0.0;
  double p = 0.0;
  double sigma = 1.0;  // 1-sigma uncertainty on p, > 0
};

struct FitResult {
  std::vector<std::string> parameter_names;
  std::vector<double> values;
  std::vector<double> std_errors;
  double residual_norm = 0.0;  // sqrt(chi^2) of the weighted residuals
  int iterations = 0;
  bool converged = false;      // false => result is advisory only
  bool brackets_lac = true;    // data range contains the anti-crossing field
};

inline FitResult fit_kratio(const SpinSystemParams& base,
                            const std::vector<PolarizationDataPoint>& data,
                            const LevMarOptions& options = {}) {
  base.validate();
  if (data.size() < 3) throw std::invalid_argument("fit_kratio: need at least 3 data points");
  for (const auto& d : data) {
    if (!(d.sigma > 0.0)) throw std::invalid_argument("fit_kratio: sigma must be > 0");
    if (!std::isfinite(d.p) || !std::isfinite(d.b_gauss)) {
      throw std::invalid_argument("fit_kratio: non-finite data");
    }
  }

  // Flip probabilities do not depend on k_ratio; precompute per point.
  struct Point {
    double num;    // p+ - p-
    double den0;   // p+ + p-
    double p;
    double sigma;
  };
  std::vector<Point> pts;
  pts.reserve(data.size());
  for (const auto& d : data) {
    const FlipProbabilities fp = flip_probabilities(base, FieldConfig{d.b_gauss});
    pts.push_back({fp.p_plus - fp.p_minus, fp.p_plus + fp.p_minus, d.p, d.sigma});
  }

  // Initial guess: invert the steady-state expression at the most polarized
  // point; fall back to 0.01.
  double k0 = 0.01;
  {
    const auto it = std::max_element(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
      return std::abs(a.p) < std::abs(b.p);
    });
    if (it != pts.end() && std::abs(it->p) > 1e-6) {
      const double k_est = (it->num / it->p - it->den0) / 2.0;
      if (std::isfinite(k_est) && k_est > 1e-12) k0 = k_est;
    }
  }

  const int m = static_cast<int>(pts.size());
  const auto model = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double k = std::exp(theta(0));
    for (int i = 0; i < m; ++i) {
      const Point& pt = pts[static_cast<std::size_t>(i)];
      const double den = 2.0 * k + pt.den0;
      r(i) = (pt.num / den - pt.p) / pt.sigma;
      if (jac) {
        const double dp_dk = -2.0 * pt.num / (den * den);
        (*jac)(i, 0) = k * dp_dk / pt.sigma;  // chain rule through k = exp(theta)
      }
    }
  };

  Eigen::VectorXd theta0(1);
  theta0 << std::log(k0);
  const LevMarOutcome outcome = levmar_solve(model, std::move(theta0), m, options);

  const double k_fit = std::exp(outcome.parameters(0));
  FitResult result;
  result.parameter_names = {"k_ratio"};
  result.values = {k_fit};
  const double sigma_theta =
      outcome.covariance_ok ? std::sqrt(std::max(outcome.covariance(0, 0), 0.0)) : 0.0;
  result.std_errors = {k_fit * sigma_theta};
  result.residual_norm = outcome.residual_norm;
  result.iterations = outcome.iterations;
  result.converged = outcome.converged;

  const auto [b_lo, b_hi] = std::minmax_element(
      data.begin(), data.end(),
      [](const PolarizationDataPoint& a, const PolarizationDataPoint& b) {
        return a.b_gauss < b.b_gauss;
      });
  const double b_lac = lac_position(base).b_gauss;
  result.brackets_lac = b_lo->b_gauss <= b_lac && b_lac <= b_hi->b_gauss;
  return result;
}

}  // namespace nvlac
