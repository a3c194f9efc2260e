#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// ODMR spectrum model: photoluminescence baseline with Lorentzian dips, one
// dip per nuclear-spin configuration. Lines are parameterized by center,
// FWHM and integrated area because the polarization estimate is a ratio of
// line areas.

namespace nvlac {

struct LorentzianLine {
  double center = 0.0;  // MHz
  double width = 1.0;   // full width at half maximum, MHz
  double area = 0.0;    // integrated baseline-relative dip area, MHz
  std::string label;    // nuclear-spin-configuration tag, e.g. "up"/"down"

  void validate() const {
    if (!(width > 0.0)) throw std::invalid_argument("LorentzianLine: width must be > 0");
    if (!(area >= 0.0)) throw std::invalid_argument("LorentzianLine: area must be >= 0");
  }

  // Unit-area Lorentzian profile evaluated at nu.
  double profile(double nu) const {
    const double hw = width / 2.0;
    const double d = nu - center;
    return hw / (std::numbers::pi * (d * d + hw * hw));
  }

  // Peak baseline-relative depth, area * 2/(pi * width).
  double peak_depth() const { return area * 2.0 / (std::numbers::pi * width); }
};

struct Spectrum {
  std::vector<double> frequencies;      // strictly increasing grid, MHz
  std::vector<double> intensities;      // photoluminescence, arbitrary units
  std::vector<LorentzianLine> lines;    // synthesis inputs or fit results
  std::optional<double> noise_sigma;    // additive noise level used in synthesis
  bool clipped = false;                 // total dip depth exceeded the baseline somewhere

  void validate() const {
    if (frequencies.size() != intensities.size()) {
      throw std::invalid_argument("Spectrum: grid and intensity sizes differ");
    }
    for (std::size_t i = 1; i < frequencies.size(); ++i) {
      if (!(frequencies[i] > frequencies[i - 1])) {
        throw std::invalid_argument("Spectrum: frequency grid must be strictly increasing");
      }
    }
    for (const double v : intensities) {
      if (!std::isfinite(v)) throw std::invalid_argument("Spectrum: non-finite intensity");
    }
  }
};

// Dips (photoluminescence drops) are the physical polarity for ODMR; peaks
// are kept available for generality.
enum class LinePolarity { dips, peaks };

// Forward model
//   I(nu) = baseline * (1 -+ sum_i area_i * L_i(nu)) + N(0, noise_sigma),
// with L_i the unit-area Lorentzian of line i, so each dip integrates
// (baseline-relative) to area_i. Deterministic for a given seed. If the
// summed dip depth exceeds 1 anywhere, the intensity is clipped at zero and
// the spectrum is flagged.
inline Spectrum synthesize_spectrum(const std::vector<LorentzianLine>& lines,
                                    std::vector<double> grid, double baseline,
                                    double noise_sigma = 0.0, std::uint64_t seed = 0,
                                    LinePolarity polarity = LinePolarity::dips) {
  if (!(baseline > 0.0)) throw std::invalid_argument("synthesize_spectrum: baseline must be > 0");
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("synthesize_spectrum: noise_sigma must be >= 0");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("synthesize_spectrum: grid must be strictly increasing");
    }
  }
  for (const auto& line : lines) line.validate();

  Spectrum spec;
  spec.lines = lines;
  spec.noise_sigma = noise_sigma;
  spec.intensities.reserve(grid.size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sign = polarity == LinePolarity::dips ? -1.0 : 1.0;

  for (const double nu : grid) {
    double depth = 0.0;
    for (const auto& line : lines) depth += line.area * line.profile(nu);
    double value = baseline * (1.0 + sign * depth);
    if (value < 0.0) {
      spec.clipped = true;
      value = 0.0;
    }
    if (noise_sigma > 0.0) value += noise_sigma * noise(rng);
    spec.intensities.push_back(value);
  }
  spec.frequencies = std::move(grid);
  return spec;
}

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("uniform_grid: need step > 0 and hi >= lo");
  }
  std::vector<double> grid;
  const std::size_t n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

struct PolarizationEstimate {
  double p = 0.0;
  std::optional<double> sigma;  // absent when no covariance information exists
};

namespace detail {

inline const LorentzianLine& line_by_label(const Spectrum& spectrum, const std::string& label) {
  for (const auto& line : spectrum.lines) {
    if (line.label == label) return line;
  }
  throw std::invalid_argument("extract_polarization: no line labeled '" + label + "'");
}

}  // namespace detail

// Polarization from two line areas, P = (A_down - A_up) / (A_down + A_up).
// Uncertainty, when area variances are supplied, is first-order propagation
// of the ratio.
inline PolarizationEstimate extract_polarization(const Spectrum& fitted,
                                                 const std::string& up_label,
                                                 const std::string& down_label,
                                                 std::optional<double> var_up = std::nullopt,
                                                 std::optional<double> var_down = std::nullopt,
                                                 std::optional<double> cov_updown = std::nullopt) {
  const LorentzianLine& up = detail::line_by_label(fitted, up_label);
  const LorentzianLine& down = detail::line_by_label(fitted, down_label);
  if (!(up.area >= 0.0) || !(down.area >= 0.0)) {
    throw std::invalid_argument("extract_polarization: areas must be >= 0");
  }
  const double total = up.area + down.area;
  if (total == 0.0) {
    throw std::domain_error("extract_polarization: both areas are zero, polarization undefined");
  }

  PolarizationEstimate est;
  est.p = (down.area - up.area) / total;
  if (var_up && var_down) {
    const double d_ddown = 2.0 * up.area / (total * total);
    const double d_dup = -2.0 * down.area / (total * total);
    double var = d_dup * d_dup * *var_up + d_ddown * d_ddown * *var_down;
    if (cov_updown) var += 2.0 * d_dup * d_ddown * *cov_updown;
    est.sigma = std::sqrt(std::max(var, 0.0));
  }
  return est;
}

}  // namespace nvlac
