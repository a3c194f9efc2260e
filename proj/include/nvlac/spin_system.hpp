#pragma once

#include <cmath>
#include <stdexcept>

// Parameters of one NV(-) center coupled to a single I = 1/2 nuclear spin.
//
// Unit convention (global): all energies are frequencies in MHz (h = 1),
// magnetic fields are in Gauss, times in ns unless a field name says
// otherwise. gamma_e converts Gauss to MHz.

namespace nvlac {

// Sign convention for the hyperfine diagonal of the m_s = +1 excited-state
// sublevels: which nuclear orientation receives +A_es/2. `plus_up` is the
// assignment produced by the operator form A_es * Sz * Iz (m_I = +1/2 for
// the up state). `plus_down` is the opposite reading; it moves the level
// anti-crossing by roughly 21 G with default parameters.
enum class EsHyperfineSign { plus_up, plus_down };

struct SpinSystemParams {
  double d_gs = 2870.0;       // ground-state zero-field splitting, MHz
  double d_es = -1420.0;      // excited-state zero-field splitting, MHz (signed)
  double a_gs = -3.05;        // ground-state 15N hyperfine coupling, MHz (signed)
  double a_es = 60.0;         // excited-state 15N hyperfine coupling, MHz (signed)
  double gamma_e = 2.8025;    // electron gyromagnetic ratio, MHz/G
  double tau_es = 12.0;       // excited-state lifetime, ns
  double k_ratio = 0.009;     // depolarization ratio k_eq0 / Gamma, dimensionless
  EsHyperfineSign es_hyperfine_sign = EsHyperfineSign::plus_up;

  // Intersystem-crossing rate, MHz. Informational only: steady states and
  // the rate model work in units of 1/Gamma and never consume this value.
  static constexpr double gamma_isc_estimate_mhz = 4.0;

  // Diagonal energy of |+1,up> relative to |0,up>, at zero field.
  double epsilon_plus_one_up() const {
    const double s = (es_hyperfine_sign == EsHyperfineSign::plus_up) ? 1.0 : -1.0;
    return d_es + s * a_es / 2.0;
  }

  // Diagonal energy of |+1,down> relative to |0,up>, at zero field.
  double epsilon_plus_one_down() const {
    const double s = (es_hyperfine_sign == EsHyperfineSign::plus_up) ? 1.0 : -1.0;
    return d_es - s * a_es / 2.0;
  }

  // Off-diagonal coupling between |0,up> and |+1,down>, MHz.
  double coupling_a() const { return a_es / std::sqrt(2.0); }

  void validate() const {
    if (!(gamma_e > 0.0)) throw std::invalid_argument("SpinSystemParams: gamma_e must be > 0");
    if (!(tau_es > 0.0)) throw std::invalid_argument("SpinSystemParams: tau_es must be > 0");
    if (!(k_ratio >= 0.0)) throw std::invalid_argument("SpinSystemParams: k_ratio must be >= 0");
    if (!std::isfinite(d_gs) || !std::isfinite(d_es) || !std::isfinite(a_gs) ||
        !std::isfinite(a_es)) {
      throw std::invalid_argument("SpinSystemParams: couplings must be finite");
    }
  }
};

// Magnetic field along the NV axis. Negative values are meaningful: the
// reversed-field configuration supplies the down->up flip probability.
struct FieldConfig {
  double b = 0.0;  // Gauss, signed

  void validate() const {
    if (!std::isfinite(b)) throw std::invalid_argument("FieldConfig: field must be finite");
  }
};

}  // namespace nvlac
