#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "nvlac/hamiltonian.hpp"
#include "nvlac/pumping.hpp"
#include "nvlac/spin_system.hpp"

// Two-nuclear-spin register: the native 15N spin plus a first-shell 13C.
// Each ground-state ESR line tags one joint orientation, so the spectrum
// has four lines split by the two hyperfine couplings.

namespace nvlac {

struct TwoSpinParams {
  SpinSystemParams base;                 // 15N part
  double a_gs_c13 = 130.0;               // ground-state 13C hyperfine splitting, MHz
  std::optional<double> a_es_c13;        // excited-state 13C coupling, MHz; no accepted
                                         // literature value, must be supplied by the user

  // a_gs_c13 = 0 is allowed and degenerates to the single-spin doublet.
  void validate() const {
    base.validate();
    if (!(a_gs_c13 >= 0.0)) throw std::invalid_argument("TwoSpinParams: a_gs_c13 must be >= 0");
  }
};

// Joint orientations ordered |N,C>: down-down, down-up, up-down, up-up.
enum class JointOrientation { down_down = 0, down_up = 1, up_down = 2, up_up = 3 };

inline constexpr std::array<const char*, 4> joint_orientation_labels = {
    "N_down_C_down", "N_down_C_up", "N_up_C_down", "N_up_C_up"};

inline double nitrogen_m(JointOrientation o) {
  return (o == JointOrientation::down_down || o == JointOrientation::down_up) ? -0.5 : 0.5;
}
inline double carbon_m(JointOrientation o) {
  return (o == JointOrientation::down_down || o == JointOrientation::up_down) ? -0.5 : 0.5;
}

struct LabeledLine {
  JointOrientation orientation;
  std::string label;
  double frequency = 0.0;  // MHz
};

// nu(m_N, m_C) = D_gs + s gamma_e B + s (A_gs m_N + A_gs_C13 m_C).
inline std::array<LabeledLine, 4> two_spin_line_positions(const TwoSpinParams& params,
                                                          const FieldConfig& field,
                                                          Manifold manifold) {
  params.validate();
  field.validate();
  const double s = manifold_sign(manifold);
  const double center = params.base.d_gs + s * params.base.gamma_e * field.b;

  std::array<LabeledLine, 4> lines;
  for (int i = 0; i < 4; ++i) {
    const auto o = static_cast<JointOrientation>(i);
    lines[static_cast<std::size_t>(i)] = {
        o, joint_orientation_labels[static_cast<std::size_t>(i)],
        center + s * (params.base.a_gs * nitrogen_m(o) + params.a_gs_c13 * carbon_m(o))};
  }
  return lines;
}

struct TwoSpinPopulations {
  // rho[orientation], ordered as JointOrientation.
  std::array<double, 4> rho{0.25, 0.25, 0.25, 0.25};

  void validate() const {
    double sum = 0.0;
    for (const double r : rho) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw std::invalid_argument("TwoSpinPopulations: entries must be in [0, 1]");
      }
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("TwoSpinPopulations: populations must sum to 1");
    }
  }

  double operator[](JointOrientation o) const { return rho[static_cast<std::size_t>(o)]; }

  // Marginal polarizations P = rho(down) - rho(up) per spin.
  double nitrogen_polarization() const {
    return rho[0] + rho[1] - rho[2] - rho[3];
  }
  double carbon_polarization() const {
    return rho[0] + rho[2] - rho[1] - rho[3];
  }
};

// Steady state with the two nuclear spins treated as independently pumped
// channels: the 13C couples through the same anti-crossing mechanism with
// its own excited-state coupling in place of the 15N one. The product form
// is an approximation; the model offers nothing beyond it.
inline TwoSpinPopulations two_spin_steady_state(const TwoSpinParams& params,
                                                const FieldConfig& field) {
  params.validate();
  if (!params.a_es_c13.has_value()) {
    throw std::invalid_argument(
        "two_spin_steady_state: a_es_c13 is required (no accepted value exists; refusing to "
        "guess)");
  }
  const double p_n = steady_state_polarization(params.base, field).p;

  SpinSystemParams carbon = params.base;
  carbon.a_es = *params.a_es_c13;
  // a_es_c13 = 0 with k_ratio = 0 means no carbon dynamics at all; the
  // channel stays unpolarized instead of tripping the degenerate-input error.
  const double p_c = carbon.a_es == 0.0 && carbon.k_ratio == 0.0
                         ? 0.0
                         : steady_state_polarization(carbon, field).p;

  const double n_down = (1.0 + p_n) / 2.0, n_up = (1.0 - p_n) / 2.0;
  const double c_down = (1.0 + p_c) / 2.0, c_up = (1.0 - p_c) / 2.0;
  TwoSpinPopulations pops;
  pops.rho = {n_down * c_down, n_down * c_up, n_up * c_down, n_up * c_up};
  return pops;
}

// Target-line-vs-rest polarization, the two-spin generalization of the
// single-spin area ratio: (rho_target - sum_others) / sum_all.
inline double joint_polarization(const TwoSpinPopulations& pops, JointOrientation target) {
  pops.validate();
  double total = 0.0;
  for (const double r : pops.rho) total += r;
  const double rho_t = pops[target];
  return (rho_t - (total - rho_t)) / total;
}

// Alternative figure of merit reported alongside: product of the marginal
// polarizations.
inline double marginal_product_polarization(const TwoSpinPopulations& pops) {
  pops.validate();
  return pops.nitrogen_polarization() * pops.carbon_polarization();
}

}  // namespace nvlac
