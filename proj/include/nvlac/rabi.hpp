#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nvlac/levmar.hpp"

// Selective Rabi nutation on one ESR line. The drive only rotates the
// electron spin of the nuclear-spin population under the targeted line, so
// the nutation contrast is proportional to that population: driving the
// down line of a polarized spin gives up to twice the unpolarized contrast,
// while the up line flattens out.

namespace nvlac {

enum class NuclearLine { up, down };

struct RabiTrace {
  double mw_frequency = 0.0;       // targeted ESR line, MHz
  std::vector<double> times;       // pulse durations, us
  std::vector<double> signal;      // normalized photoluminescence
  double rabi_frequency = 0.0;     // MHz
  double contrast = 0.0;           // effective contrast of this trace, in [0, 1]

  void validate() const {
    if (times.size() != signal.size()) throw std::invalid_argument("RabiTrace: size mismatch");
    if (!(contrast >= 0.0 && contrast <= 1.0)) {
      throw std::invalid_argument("RabiTrace: contrast must be in [0, 1]");
    }
    for (const double s : signal) {
      if (!std::isfinite(s)) throw std::invalid_argument("RabiTrace: non-finite signal");
    }
  }
};

// S(t) = 1 - C * rho_target * (1 - cos(2 pi f t)) / 2 with rho_target the
// population of the addressed nuclear orientation, (1+P)/2 for the down
// line and (1-P)/2 for the up line.
inline RabiTrace synthesize_rabi(double polarization, NuclearLine target, double rabi_frequency,
                                 double esr_contrast, std::vector<double> times,
                                 double mw_frequency = 0.0) {
  if (!(esr_contrast > 0.0 && esr_contrast <= 1.0)) {
    throw std::invalid_argument("synthesize_rabi: esr_contrast must be in (0, 1]");
  }
  if (!(rabi_frequency > 0.0)) {
    throw std::invalid_argument("synthesize_rabi: rabi_frequency must be > 0");
  }
  if (!(std::abs(polarization) <= 1.0)) {
    throw std::invalid_argument("synthesize_rabi: |polarization| must be <= 1");
  }

  const double rho =
      target == NuclearLine::down ? (1.0 + polarization) / 2.0 : (1.0 - polarization) / 2.0;

  RabiTrace trace;
  trace.mw_frequency = mw_frequency;
  trace.rabi_frequency = rabi_frequency;
  trace.contrast = esr_contrast * rho;
  trace.signal.reserve(times.size());
  for (const double t : times) {
    trace.signal.push_back(
        1.0 - trace.contrast * (1.0 - std::cos(2.0 * std::numbers::pi * rabi_frequency * t)) / 2.0);
  }
  trace.times = std::move(times);
  return trace;
}

struct RabiFit {
  double rabi_frequency = 0.0;
  double contrast = 0.0;
  double residual_norm = 0.0;
  bool frequency_determinate = true;  // false for flat traces
  bool converged = false;
};

namespace detail {

// Best-fit offset/amplitude for a fixed frequency; returns the cost.
inline double rabi_linear_fit(const std::vector<double>& t, const std::vector<double>& y, double f,
                              double& offset, double& amplitude) {
  double s_cc = 0.0, s_c = 0.0, s_cy = 0.0, s_y = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * f * t[i]);
    s_cc += c * c;
    s_c += c;
    s_cy += c * y[i];
    s_y += y[i];
  }
  const double det = n * s_cc - s_c * s_c;
  if (std::abs(det) < 1e-300) {
    offset = s_y / n;
    amplitude = 0.0;
  } else {
    amplitude = (n * s_cy - s_c * s_y) / det;
    offset = (s_y - amplitude * s_c) / n;
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * f * t[i]);
    const double r = offset + amplitude * c - y[i];
    cost += r * r;
  }
  return cost;
}

}  // namespace detail

// Least-squares cosine fit S(t) = a + b cos(2 pi f t). The frequency is
// seeded by a grid scan (the trace must span at least one period) and
// refined together with a and b; contrast = 2b.
inline RabiFit fit_rabi(const RabiTrace& trace, const LevMarOptions& options = {}) {
  trace.validate();
  if (trace.times.size() < 4) throw std::invalid_argument("fit_rabi: need at least 4 samples");
  const std::vector<double>& t = trace.times;
  const std::vector<double>& y = trace.signal;
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw std::invalid_argument("fit_rabi: zero time span");

  // Flat-trace guard: signal variation below numerical noise.
  const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
  RabiFit fit;
  if (*y_max - *y_min < 1e-12) {
    fit.contrast = 0.0;
    fit.rabi_frequency = 0.0;
    fit.frequency_determinate = false;
    fit.converged = true;
    double mean = 0.0;
    for (const double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double cost = 0.0;
    for (const double v : y) cost += (v - mean) * (v - mean);
    fit.residual_norm = std::sqrt(cost);
    return fit;
  }

  // Grid scan: frequencies from one period over the span up to the Nyquist
  // limit of the sampling, at least four samples per periodogram lobe
  // (lobe width ~ 1/span).
  const double f_min = 1.0 / span;
  const double mean_dt = span / static_cast<double>(t.size() - 1);
  const double f_max = 0.5 / mean_dt;
  const int n_scan = static_cast<int>(
      std::clamp(4.0 * (f_max - f_min) * span, 400.0, 20000.0));
  double best_f = f_min, best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    const double f = f_min + (f_max - f_min) * static_cast<double>(i) / n_scan;
    double offset = 0.0, amplitude = 0.0;
    const double cost = detail::rabi_linear_fit(t, y, f, offset, amplitude);
    if (cost < best_cost) {
      best_cost = cost;
      best_f = f;
    }
  }

  double offset0 = 0.0, amplitude0 = 0.0;
  detail::rabi_linear_fit(t, y, best_f, offset0, amplitude0);

  const int m = static_cast<int>(t.size());
  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double a = p(0), b = p(1), f = p(2);
    for (int i = 0; i < m; ++i) {
      const double phase = 2.0 * std::numbers::pi * f * t[static_cast<std::size_t>(i)];
      const double c = std::cos(phase);
      r(i) = a + b * c - y[static_cast<std::size_t>(i)];
      if (jac) {
        (*jac)(i, 0) = 1.0;
        (*jac)(i, 1) = c;
        (*jac)(i, 2) = -b * std::sin(phase) * 2.0 * std::numbers::pi * t[static_cast<std::size_t>(i)];
      }
    }
  };

  Eigen::VectorXd p0(3);
  p0 << offset0, amplitude0, best_f;
  const LevMarOutcome outcome = levmar_solve(model, std::move(p0), m, options);

  fit.rabi_frequency = std::abs(outcome.parameters(2));
  fit.contrast = std::clamp(2.0 * outcome.parameters(1), 0.0, 1.0);
  fit.residual_norm = outcome.residual_norm;
  fit.frequency_determinate = fit.contrast > 1e-9;
  fit.converged = outcome.converged;
  if (!outcome.converged) {
    throw std::runtime_error("fit_rabi: no convergence within the iteration budget");
  }
  return fit;
}

// Contrast ratio between the up-line and down-line traces for a given
// polarization, (1 - P) / (1 + P).
inline double rabi_contrast_ratio(double polarization) {
  if (!(polarization >= 0.0 && polarization < 1.0)) {
    throw std::domain_error("rabi_contrast_ratio: need P in [0, 1)");
  }
  return (1.0 - polarization) / (1.0 + polarization);
}

}  // namespace nvlac
