#pragma once

// SI constants used for the effective-temperature conversion. Everything
// else in the library works in frequency units (MHz, h = 1) and Gauss.

namespace nvlac::constants {

// CODATA 2018 exact values.
inline constexpr double planck_h_js = 6.62607015e-34;
inline constexpr double boltzmann_jk = 1.380649e-23;

}  // namespace nvlac::constants
