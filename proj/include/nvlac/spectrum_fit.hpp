#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvlac/levmar.hpp"
#include "nvlac/spectra.hpp"

// Multi-Lorentzian least-squares fit of an ODMR spectrum. Free parameters
// are the baseline plus (center, width, area) per line. Initialization uses
// smoothed dip detection; explicit guesses can be supplied instead.

namespace nvlac {

struct SpectrumFitInit {
  enum class Mode { detect_dips, user_guesses };
  Mode mode = Mode::detect_dips;
  std::vector<LorentzianLine> guesses;  // used when mode == user_guesses
  double baseline_guess = 0.0;          // 0 = estimate from the data

  static SpectrumFitInit detect() { return {}; }
  static SpectrumFitInit from_guesses(std::vector<LorentzianLine> lines, double baseline = 0.0) {
    SpectrumFitInit init;
    init.mode = Mode::user_guesses;
    init.guesses = std::move(lines);
    init.baseline_guess = baseline;
    return init;
  }
};

struct SpectrumFit {
  Spectrum spectrum;            // input grid/intensities with fitted lines attached
  double baseline = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  LinePolarity polarity = LinePolarity::dips;
  Eigen::MatrixXd covariance;   // full parameter covariance [base, (c,w,A)...]
  bool covariance_ok = false;

  // Covariance lookup for line areas (lines are sorted by center; index i
  // refers to spectrum.lines[i]).
  double area_variance(std::size_t i) const {
    return covariance_ok ? covariance(3 * static_cast<int>(i) + 3, 3 * static_cast<int>(i) + 3)
                         : std::numeric_limits<double>::quiet_NaN();
  }
  double area_covariance(std::size_t i, std::size_t j) const {
    return covariance_ok ? covariance(3 * static_cast<int>(i) + 3, 3 * static_cast<int>(j) + 3)
                         : std::numeric_limits<double>::quiet_NaN();
  }
};

class FitInitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpectrumFitError : public std::runtime_error {
 public:
  SpectrumFitError(const std::string& what, SpectrumFit best)
      : std::runtime_error(what), best_so_far(std::move(best)) {}
  SpectrumFit best_so_far;
};

namespace detail {

inline std::vector<double> moving_average(const std::vector<double>& y, std::size_t half_window) {
  std::vector<double> out(y.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(half_window);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - hw);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + hw);
    double sum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) sum += y[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Robust noise scale from first differences (MAD-based).
inline double noise_scale(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> diffs;
  diffs.reserve(y.size() - 1);
  for (std::size_t i = 1; i < y.size(); ++i) diffs.push_back(std::abs(y[i] - y[i - 1]));
  const std::size_t mid = diffs.size() / 2;
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid), diffs.end());
  return 1.4826 * diffs[mid] / std::sqrt(2.0);
}

struct DipCandidate {
  std::size_t index = 0;
  double depth = 0.0;
};

// Local minima of the smoothed trace, deepest first.
inline std::vector<DipCandidate> detect_dips(const std::vector<double>& smoothed,
                                             double baseline_estimate, double min_depth) {
  std::vector<DipCandidate> dips;
  const std::size_t n = smoothed.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (smoothed[i] <= smoothed[i - 1] && smoothed[i] < smoothed[i + 1]) {
      const double depth = baseline_estimate - smoothed[i];
      if (depth > min_depth) dips.push_back({i, depth});
    }
  }
  std::sort(dips.begin(), dips.end(), [](const DipCandidate& a, const DipCandidate& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.index < b.index;
  });
  return dips;
}

inline double estimate_half_width(const std::vector<double>& freq,
                                  const std::vector<double>& smoothed, std::size_t dip,
                                  double baseline_estimate) {
  const double half_level = smoothed[dip] + (baseline_estimate - smoothed[dip]) / 2.0;
  double left = freq.front();
  for (std::size_t i = dip; i-- > 0;) {
    if (smoothed[i] >= half_level) {
      left = freq[i];
      break;
    }
  }
  double right = freq.back();
  for (std::size_t i = dip + 1; i < smoothed.size(); ++i) {
    if (smoothed[i] >= half_level) {
      right = freq[i];
      break;
    }
  }
  return std::max(right - left, 2.0 * (freq[1] - freq[0]));
}

inline void pack_parameters(double baseline, const std::vector<LorentzianLine>& lines,
                            Eigen::VectorXd& p) {
  p.resize(1 + 3 * static_cast<int>(lines.size()));
  p(0) = baseline;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    p(3 * static_cast<int>(i) + 1) = lines[i].center;
    p(3 * static_cast<int>(i) + 2) = lines[i].width;
    p(3 * static_cast<int>(i) + 3) = lines[i].area;
  }
}

}  // namespace detail

// Nonlinear least squares over baseline + (center, width, area) per line.
// Returns fitted lines sorted by center. Throws FitInitializationError when
// dip detection finds fewer candidates than n_lines, and SpectrumFitError
// (carrying the best parameters reached) when the iteration budget runs out.
inline SpectrumFit fit_spectrum(const Spectrum& input, std::size_t n_lines,
                                const SpectrumFitInit& init = SpectrumFitInit::detect(),
                                const LevMarOptions& options = {},
                                LinePolarity polarity = LinePolarity::dips) {
  input.validate();
  if (n_lines < 1) throw std::invalid_argument("fit_spectrum: n_lines must be >= 1");
  const std::size_t n_pts = input.frequencies.size();
  if (n_pts < 3 * n_lines + 1) {
    throw std::invalid_argument("fit_spectrum: not enough samples for the requested line count");
  }

  const std::vector<double>& freq = input.frequencies;
  const std::vector<double>& y = input.intensities;

  // --- initialization ---
  double baseline0 = init.baseline_guess;
  std::vector<LorentzianLine> lines0;
  if (init.mode == SpectrumFitInit::Mode::user_guesses) {
    if (init.guesses.size() != n_lines) {
      throw std::invalid_argument("fit_spectrum: guess count does not match n_lines");
    }
    lines0 = init.guesses;
    if (baseline0 <= 0.0) {
      baseline0 = *std::max_element(y.begin(), y.end());
    }
  } else {
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    baseline0 = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1))];

    const std::size_t half_window = std::clamp<std::size_t>(n_pts / 200, 1, 10);
    const std::vector<double> smoothed = detail::moving_average(y, half_window);
    const double min_depth = std::max(3.0 * detail::noise_scale(y), 0.01 * std::abs(baseline0));
    const auto candidates = detail::detect_dips(smoothed, baseline0, min_depth);

    // Deepest first; noise can split one dip into several nearby minima, so
    // candidates within a line width of an already accepted dip are merged
    // into it rather than seeding a second line.
    const double grid_step = (freq.back() - freq.front()) / static_cast<double>(n_pts - 1);
    for (const auto& dip : candidates) {
      if (lines0.size() == n_lines) break;
      const double center = freq[dip.index];
      const double width = detail::estimate_half_width(freq, smoothed, dip.index, baseline0);
      bool duplicate = false;
      for (const auto& kept : lines0) {
        if (std::abs(kept.center - center) <
            std::max(0.7 * std::max(kept.width, width), 2.5 * grid_step)) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      LorentzianLine line;
      line.center = center;
      line.width = width;
      const double rel_depth = dip.depth / std::max(baseline0, 1e-300);
      line.area = rel_depth * std::numbers::pi * line.width / 2.0;
      lines0.push_back(line);
    }
    if (lines0.size() < n_lines) {
      throw FitInitializationError("fit_spectrum: detected " + std::to_string(lines0.size()) +
                                   " dip(s), need " + std::to_string(n_lines));
    }
  }

  // --- model ---
  const double sign = polarity == LinePolarity::dips ? -1.0 : 1.0;
  const int m = static_cast<int>(n_pts);
  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double base = p(0);
    const int k = static_cast<int>((p.size() - 1) / 3);
    for (int j = 0; j < m; ++j) {
      const double nu = freq[static_cast<std::size_t>(j)];
      double depth = 0.0;
      for (int i = 0; i < k; ++i) {
        const double c = p(3 * i + 1);
        const double w = p(3 * i + 2);
        const double area = p(3 * i + 3);
        const double hw = w / 2.0;
        const double d = nu - c;
        const double den = d * d + hw * hw;
        const double profile = hw / (std::numbers::pi * den);
        depth += area * profile;
        if (jac) {
          const double dprof_dc = 2.0 * hw * d / (std::numbers::pi * den * den);
          const double dprof_dw = (d * d - hw * hw) / (2.0 * std::numbers::pi * den * den);
          (*jac)(j, 3 * i + 1) = sign * base * area * dprof_dc;
          (*jac)(j, 3 * i + 2) = sign * base * area * dprof_dw;
          (*jac)(j, 3 * i + 3) = sign * base * profile;
        }
      }
      const double value = base * (1.0 + sign * depth);
      r(j) = value - y[static_cast<std::size_t>(j)];
      if (jac) (*jac)(j, 0) = 1.0 + sign * depth;
    }
  };

  Eigen::VectorXd p0;
  detail::pack_parameters(baseline0, lines0, p0);
  const LevMarOutcome outcome = levmar_solve(model, std::move(p0), m, options);

  SpectrumFit fit;
  fit.spectrum = input;
  fit.spectrum.lines.clear();
  fit.polarity = polarity;
  fit.baseline = outcome.parameters(0);
  fit.residual_norm = outcome.residual_norm;
  fit.iterations = outcome.iterations;
  fit.converged = outcome.converged;

  std::vector<LorentzianLine> fitted(n_lines);
  for (std::size_t i = 0; i < n_lines; ++i) {
    fitted[i].center = outcome.parameters(3 * static_cast<int>(i) + 1);
    fitted[i].width = std::abs(outcome.parameters(3 * static_cast<int>(i) + 2));
    fitted[i].area = std::max(outcome.parameters(3 * static_cast<int>(i) + 3), 0.0);
  }
  // Relabel by proximity to the input lines, when the input carried labels.
  for (auto& line : fitted) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ref : input.lines) {
      const double d = std::abs(ref.center - line.center);
      if (d < best) {
        best = d;
        line.label = ref.label;
      }
    }
  }
  // Reorder (with covariance rows/columns) by ascending center.
  std::vector<std::size_t> order(n_lines);
  for (std::size_t i = 0; i < n_lines; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return fitted[a].center < fitted[b].center; });
  for (std::size_t i = 0; i < n_lines; ++i) fit.spectrum.lines.push_back(fitted[order[i]]);

  if (outcome.covariance_ok) {
    const int dim = static_cast<int>(outcome.parameters.size());
    Eigen::VectorXi perm(dim);
    perm(0) = 0;
    for (std::size_t i = 0; i < n_lines; ++i) {
      for (int c = 0; c < 3; ++c) {
        perm(3 * static_cast<int>(i) + 1 + c) = 3 * static_cast<int>(order[i]) + 1 + c;
      }
    }
    fit.covariance.resize(dim, dim);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) fit.covariance(a, b) = outcome.covariance(perm(a), perm(b));
    }
    fit.covariance_ok = true;
  }

  if (!outcome.converged) {
    throw SpectrumFitError("fit_spectrum: no convergence within the iteration budget", fit);
  }
  return fit;
}

// Polarization from a fitted spectrum with propagated uncertainty. Falls
// back to residual-bootstrap (refitting resampled data, >= 200 replicas)
// when the fit covariance is unavailable or not positive.
inline PolarizationEstimate fit_polarization(const SpectrumFit& fit, const std::string& up_label,
                                             const std::string& down_label,
                                             std::size_t bootstrap_replicas = 200,
                                             std::uint64_t bootstrap_seed = 7) {
  std::size_t i_up = fit.spectrum.lines.size();
  std::size_t i_down = fit.spectrum.lines.size();
  for (std::size_t i = 0; i < fit.spectrum.lines.size(); ++i) {
    if (fit.spectrum.lines[i].label == up_label) i_up = i;
    if (fit.spectrum.lines[i].label == down_label) i_down = i;
  }
  if (i_up >= fit.spectrum.lines.size() || i_down >= fit.spectrum.lines.size()) {
    throw std::invalid_argument("fit_polarization: requested labels not present");
  }

  const double var_up = fit.area_variance(i_up);
  const double var_down = fit.area_variance(i_down);
  const double cov = fit.area_covariance(i_up, i_down);
  if (fit.covariance_ok && var_up >= 0.0 && var_down >= 0.0 && std::isfinite(cov)) {
    return extract_polarization(fit.spectrum, up_label, down_label, var_up, var_down, cov);
  }

  // Bootstrap: resample residuals around the fitted model and refit from
  // the fitted parameters.
  const PolarizationEstimate point = extract_polarization(fit.spectrum, up_label, down_label);
  std::vector<double> model_values(fit.spectrum.frequencies.size());
  {
    Spectrum noiseless = synthesize_spectrum(fit.spectrum.lines, fit.spectrum.frequencies,
                                             fit.baseline, 0.0, 0, fit.polarity);
    model_values = noiseless.intensities;
  }
  std::vector<double> residuals(model_values.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    residuals[i] = fit.spectrum.intensities[i] - model_values[i];
  }

  std::mt19937_64 rng(bootstrap_seed);
  std::uniform_int_distribution<std::size_t> pick(0, residuals.size() - 1);
  std::vector<double> samples;
  samples.reserve(bootstrap_replicas);
  for (std::size_t rep = 0; rep < bootstrap_replicas; ++rep) {
    Spectrum replica = fit.spectrum;
    for (std::size_t i = 0; i < replica.intensities.size(); ++i) {
      replica.intensities[i] = model_values[i] + residuals[pick(rng)];
    }
    try {
      const SpectrumFit refit =
          fit_spectrum(replica, fit.spectrum.lines.size(),
                       SpectrumFitInit::from_guesses(fit.spectrum.lines, fit.baseline), {},
                       fit.polarity);
      samples.push_back(extract_polarization(refit.spectrum, up_label, down_label).p);
    } catch (const std::exception&) {
      // skip failed replicas
    }
  }

  PolarizationEstimate est = point;
  if (samples.size() >= 2) {
    double mean = 0.0;
    for (const double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);
    est.sigma = std::sqrt(var);
  }
  return est;
}

}  // namespace nvlac
