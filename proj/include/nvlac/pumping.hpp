#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nvlac/constants.hpp"
#include "nvlac/hamiltonian.hpp"
#include "nvlac/spin_system.hpp"

// Optical-pumping rate model: per-cycle nuclear flip probabilities from the
// excited-state mixing, the steady-state polarization, and the time-domain
// relaxation toward it. Time is measured in units of 1/Gamma throughout, so
// the intersystem-crossing rate never needs an absolute value.

namespace nvlac {

struct FlipProbabilities {
  double p_plus = 0.0;   // up -> down flip probability per excitation cycle, in [0, 1/2]
  double p_minus = 0.0;  // down -> up flip probability, p_minus(B) = p_plus(-B)
  double omega = 0.0;    // excited-state precession frequency at +B, MHz
  // Precession fast compared with the excited-state decay, omega >= 1/(2 pi tau).
  // Reported as a validity flag, never enforced.
  bool fast_precession = true;
};

inline FlipProbabilities flip_probabilities(const SpinSystemParams& params,
                                            const FieldConfig& field) {
  params.validate();
  field.validate();
  const EigenStructure at_plus = eigenstructure(params, field);
  const EigenStructure at_minus = eigenstructure(params, FieldConfig{-field.b});

  FlipProbabilities fp;
  fp.p_plus = at_plus.p_mix() / 2.0;
  fp.p_minus = at_minus.p_mix() / 2.0;
  const double a = params.coupling_a();
  fp.omega = 0.5 * std::sqrt(at_plus.delta * at_plus.delta + 4.0 * a * a);
  fp.fast_precession = fp.omega >= 1000.0 / (2.0 * std::numbers::pi * params.tau_es);
  return fp;
}

struct PolarizationState {
  double p = 0.0;                // c^2 - d^2, in [-1, 1]
  double population_down = 0.5;  // c^2, occupation of |0,down>
  double population_up = 0.5;    // d^2, occupation of |0,up>

  static PolarizationState from_polarization(double p) {
    if (!(std::abs(p) <= 1.0)) {
      throw std::domain_error("PolarizationState: |p| must be <= 1");
    }
    return {p, (1.0 + p) / 2.0, (1.0 - p) / 2.0};
  }
};

// Steady state of the rate model,
//   P = (p+ - p-) / (2 k_eq0/Gamma + p+ + p-).
inline PolarizationState steady_state_polarization(const SpinSystemParams& params,
                                                   const FieldConfig& field) {
  const FlipProbabilities fp = flip_probabilities(params, field);
  const double denom = 2.0 * params.k_ratio + fp.p_plus + fp.p_minus;
  if (denom == 0.0) {
    throw std::domain_error(
        "steady_state_polarization: degenerate input, k_ratio = 0 with no state mixing");
  }
  return PolarizationState::from_polarization((fp.p_plus - fp.p_minus) / denom);
}

struct PolarizationSample {
  double t = 0.0;  // time in units of 1/Gamma
  PolarizationState state;
};

// Relaxation of the polarization under
//   dP/dt = (1-P) p+ / 2 - (1+P) p- / 2 - k_ratio P     (t in 1/Gamma units),
// integrated with a fixed-step classical RK4. The equation is linear with a
// single attracting fixed point, the Eq.-of-steady-state value above.
inline std::vector<PolarizationSample> evolve_polarization(const SpinSystemParams& params,
                                                           const FieldConfig& field, double p0,
                                                           double t_end, double dt = 0.01) {
  if (!(std::abs(p0) <= 1.0)) throw std::invalid_argument("evolve_polarization: |p0| must be <= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_polarization: dt must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve_polarization: t_end must be > 0");

  const FlipProbabilities fp = flip_probabilities(params, field);
  const double gain = (fp.p_plus - fp.p_minus) / 2.0;
  const double loss = (fp.p_plus + fp.p_minus) / 2.0 + params.k_ratio;
  const auto rhs = [&](double p) { return gain - loss * p; };

  std::vector<PolarizationSample> series;
  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
  series.reserve(n_steps + 1);

  double t = 0.0;
  double p = p0;
  series.push_back({t, PolarizationState::from_polarization(p)});
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double h = std::min(dt, t_end - t);
    const double k1 = rhs(p);
    const double k2 = rhs(p + h / 2.0 * k1);
    const double k3 = rhs(p + h / 2.0 * k2);
    const double k4 = rhs(p + h * k3);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    if (std::abs(p) > 1.0 + 1e-12) {
      throw std::runtime_error("evolve_polarization: |P| > 1 overshoot, reduce dt");
    }
    p = std::clamp(p, -1.0, 1.0);
    series.push_back({t, PolarizationState::from_polarization(p)});
  }
  return series;
}

// Temperature of a two-level Boltzmann distribution over the nuclear Zeeman
// splitting nu_n that reproduces polarization |p|:
//   T = h nu_n / (2 k_B atanh(|p|)).
// p = 0 maps to +infinity (signaled through the return value, not a throw).
inline double effective_temperature(double p, double nu_n_khz) {
  if (!(nu_n_khz > 0.0)) throw std::invalid_argument("effective_temperature: nu_n must be > 0");
  if (std::abs(p) >= 1.0) {
    throw std::domain_error("effective_temperature: |p| >= 1 has no finite Boltzmann temperature");
  }
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  const double nu_hz = nu_n_khz * 1e3;
  return constants::planck_h_js * nu_hz / (2.0 * constants::boltzmann_jk * std::atanh(std::abs(p)));
}

}  // namespace nvlac
