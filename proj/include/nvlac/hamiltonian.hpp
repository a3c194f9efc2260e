#pragma once

#include <array>
#include <cmath>
#include <string_view>

#include "nvlac/spin_system.hpp"

// Reduced excited-state Hamiltonian of the NV(-) center restricted to the
// m_s = 0, +1 sublevels, its analytic diagonalization, and the ground-state
// ESR line positions.

namespace nvlac {

// 4x4 real symmetric matrix in the basis [|+1,up>, |+1,down>, |0,up>, |0,down>],
// entries in MHz, energy origin at |0,up>. Only |+1,down> and |0,up> couple.
struct ExcitedHamiltonian {
  std::array<std::array<double, 4>, 4> matrix{};

  static constexpr std::array<std::string_view, 4> basis_labels = {
      "|+1,up>", "|+1,down>", "|0,up>", "|0,down>"};

  // Named accessors for the entries the model depends on.
  double diag_plus_one_up() const { return matrix[0][0]; }
  double diag_plus_one_down() const { return matrix[1][1]; }
  double coupling() const { return matrix[1][2]; }
};

// Eigenstructure of the 2x2 coupled block {|+1,down>, |0,up>}, with the two
// decoupled energies passed through. |plus> = alpha |0,up> + beta |+1,down>,
// phase fixed by alpha >= 0 and sign(beta) = sign(coupling).
struct EigenStructure {
  double e_zero_down = 0.0;   // E(|0,down>), always 0 by the energy origin
  double e_plus_one_up = 0.0; // E(|+1,up>)
  double e_plus = 0.0;        // E(|plus>)
  double e_minus = 0.0;       // E(|minus>)
  double alpha = 1.0;
  double beta = 0.0;
  double delta = 0.0;         // detuning b + eps(+1,down), MHz

  std::array<double, 4> energies() const { return {e_zero_down, e_plus_one_up, e_plus, e_minus}; }

  // Maximum nuclear flip probability 4 a^2 b^2.
  double p_mix() const { return 4.0 * alpha * alpha * beta * beta; }
};

inline ExcitedHamiltonian build_excited_hamiltonian(const SpinSystemParams& params,
                                                    const FieldConfig& field) {
  const double b = params.gamma_e * field.b;
  const double a = params.coupling_a();
  ExcitedHamiltonian h;
  h.matrix[0][0] = params.epsilon_plus_one_up() + b;
  h.matrix[1][1] = params.epsilon_plus_one_down() + b;
  h.matrix[1][2] = a;
  h.matrix[2][1] = a;
  return h;
}

// Analytic diagonalization. For the block [[delta, a], [a, 0]] the
// eigenvalues are delta/2 +- sqrt(delta^2/4 + a^2); the |plus> branch is the
// one adiabatically connected to |0,up> at low field, which for a != 0 is
// the upper eigenvalue. a = 0 decouples the block exactly.
inline EigenStructure eigenstructure(const ExcitedHamiltonian& h) {
  EigenStructure es;
  es.e_plus_one_up = h.diag_plus_one_up();
  const double delta = h.diag_plus_one_down();
  const double a = h.coupling();
  es.delta = delta;

  if (a == 0.0) {
    es.e_plus = 0.0;  // pure |0,up>
    es.e_minus = delta;
    es.alpha = 1.0;
    es.beta = 0.0;
    return es;
  }

  const double root = std::sqrt(delta * delta / 4.0 + a * a);
  const double lambda_plus = delta / 2.0 + root;
  const double lambda_minus = delta / 2.0 - root;
  const double norm = std::sqrt(a * a + lambda_plus * lambda_plus);

  es.e_plus = lambda_plus;
  es.e_minus = lambda_minus;
  es.alpha = std::abs(a) / norm;
  es.beta = (a >= 0.0 ? lambda_plus : -lambda_plus) / norm;
  return es;
}

inline EigenStructure eigenstructure(const SpinSystemParams& params, const FieldConfig& field) {
  return eigenstructure(build_excited_hamiltonian(params, field));
}

struct LacPosition {
  double b_gauss = 0.0;
  bool true_crossing = false;  // a = 0: the levels cross instead of anti-crossing
};

// Field that minimizes the gap between the two mixed eigenenergies. The gap
// is sqrt(delta^2 + 4a^2), minimal where the detuning vanishes.
inline LacPosition lac_position(const SpinSystemParams& params) {
  params.validate();
  LacPosition lac;
  lac.b_gauss = -params.epsilon_plus_one_down() / params.gamma_e;
  lac.true_crossing = (params.coupling_a() == 0.0);
  return lac;
}

// Electron-spin manifold addressed by the microwave drive.
enum class Manifold { ms_minus_one, ms_plus_one };

inline double manifold_sign(Manifold m) { return m == Manifold::ms_minus_one ? -1.0 : 1.0; }

// Ground-state ESR transition frequencies, one per nuclear orientation.
// nu(m_I) = D_gs + s*gamma_e*B + s*A_gs*m_I; the splitting is |A_gs|
// independent of field. Nuclear Zeeman shifts are neglected.
struct EsrLines {
  double nu_up = 0.0;    // transition with the nucleus in |up>, MHz
  double nu_down = 0.0;  // transition with the nucleus in |down>, MHz

  double splitting() const { return std::abs(nu_up - nu_down); }
};

inline EsrLines ground_esr_frequencies(const SpinSystemParams& params, const FieldConfig& field,
                                       Manifold manifold) {
  const double s = manifold_sign(manifold);
  const double center = params.d_gs + s * params.gamma_e * field.b;
  EsrLines lines;
  lines.nu_up = center + s * params.a_gs * 0.5;
  lines.nu_down = center - s * params.a_gs * 0.5;
  return lines;
}

}  // namespace nvlac
