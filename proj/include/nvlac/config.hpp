#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvlac/levmar.hpp"
#include "nvlac/spectra.hpp"
#include "nvlac/spin_system.hpp"
#include "nvlac/sweep.hpp"
#include "nvlac/two_spin.hpp"

// Run configuration for the CLI. One JSON section per module; every field
// has a default chosen so that an empty config document reproduces the
// reference NV(-)/15N parameter set.

namespace nvlac {

struct SynthesisConfig {
  double linewidth_mhz = 1.0;   // FWHM used for synthesized lines
  double baseline = 1.0;
  double total_dip_area = 0.3;  // summed line area, split by populations, MHz
  double noise_sigma = 0.0;     // absolute units of the baseline
  std::uint64_t seed = 1;
  double freq_margin_mhz = 15.0;  // grid padding beyond the outermost lines
  double freq_step_mhz = 0.02;
  Manifold manifold = Manifold::ms_minus_one;
  LinePolarity polarity = LinePolarity::dips;
};

struct FitConfig {
  int max_iterations = 200;
  double tolerance = 1e-10;
  bool refit = true;  // refit synthesized spectra before extracting P

  LevMarOptions levmar() const {
    LevMarOptions opts;
    opts.max_iterations = max_iterations;
    opts.tolerance = tolerance;
    return opts;
  }
};

struct RabiConfig {
  double rabi_frequency_mhz = 1.0;
  double esr_contrast = 0.3;
  double t_max_us = 3.0;
  int n_points = 301;
  std::optional<double> polarization;  // override; default = pumping model at the sweep field
};

struct MonteCarloConfig {
  std::uint64_t n_spins = 100000;
  std::uint64_t n_cycles = 2000;
  std::uint64_t seed = 42;
  double p0 = 0.0;
  std::uint64_t trace_stride = 1;
};

struct OdeConfig {
  bool enabled = false;
  double t_end = 100.0;  // units of 1/Gamma
  double dt = 0.01;
  double p0 = 0.0;
};

struct TwoSpinConfig {
  bool enabled = false;
  double a_gs_c13_mhz = 130.0;
  std::optional<double> a_es_c13_mhz;
  // Explicit populations (ordered N_down_C_down, N_down_C_up, N_up_C_down,
  // N_up_C_up) take precedence over the steady-state model when present.
  std::optional<std::array<double, 4>> populations;

  TwoSpinParams params(const SpinSystemParams& base) const {
    TwoSpinParams p;
    p.base = base;
    p.a_gs_c13 = a_gs_c13_mhz;
    p.a_es_c13 = a_es_c13_mhz;
    return p;
  }
};

struct RunConfig {
  SpinSystemParams spin_system;
  TwoSpinConfig two_spin;
  // Absent = command-specific default range.
  std::optional<SweepRange> sweep;
  SynthesisConfig synthesis;
  FitConfig fit;
  RabiConfig rabi;
  MonteCarloConfig mc;
  OdeConfig ode;
  std::string out_dir = "out";

  SweepRange sweep_or(const SweepRange& fallback) const { return sweep ? *sweep : fallback; }
};

namespace detail {

using nlohmann::json;

template <typename T>
void get_if_present(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

inline void check_known_keys(const json& j, std::initializer_list<const char*> known,
                             const std::string& section) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in section '" +
                                  section + "'");
    }
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::check_known_keys;
  using detail::get_if_present;
  using detail::get_optional;

  RunConfig cfg;
  check_known_keys(j,
                   {"spin_system", "two_spin", "sweep", "synthesis", "fit", "rabi", "mc", "ode",
                    "output"},
                   "<root>");

  if (j.contains("spin_system")) {
    const auto& s = j.at("spin_system");
    check_known_keys(s,
                     {"d_gs_mhz", "d_es_mhz", "a_gs_mhz", "a_es_mhz", "gamma_e_mhz_per_g",
                      "tau_es_ns", "k_ratio", "es_hyperfine_sign"},
                     "spin_system");
    get_if_present(s, "d_gs_mhz", cfg.spin_system.d_gs);
    get_if_present(s, "d_es_mhz", cfg.spin_system.d_es);
    get_if_present(s, "a_gs_mhz", cfg.spin_system.a_gs);
    get_if_present(s, "a_es_mhz", cfg.spin_system.a_es);
    get_if_present(s, "gamma_e_mhz_per_g", cfg.spin_system.gamma_e);
    get_if_present(s, "tau_es_ns", cfg.spin_system.tau_es);
    get_if_present(s, "k_ratio", cfg.spin_system.k_ratio);
    if (s.contains("es_hyperfine_sign")) {
      const std::string v = s.at("es_hyperfine_sign").get<std::string>();
      if (v == "plus_up") {
        cfg.spin_system.es_hyperfine_sign = EsHyperfineSign::plus_up;
      } else if (v == "plus_down") {
        cfg.spin_system.es_hyperfine_sign = EsHyperfineSign::plus_down;
      } else {
        throw std::invalid_argument("config: es_hyperfine_sign must be plus_up or plus_down");
      }
    }
    cfg.spin_system.validate();
  }

  if (j.contains("two_spin")) {
    const auto& t = j.at("two_spin");
    check_known_keys(t, {"enabled", "a_gs_c13_mhz", "a_es_c13_mhz", "populations"}, "two_spin");
    get_if_present(t, "enabled", cfg.two_spin.enabled);
    get_if_present(t, "a_gs_c13_mhz", cfg.two_spin.a_gs_c13_mhz);
    get_optional(t, "a_es_c13_mhz", cfg.two_spin.a_es_c13_mhz);
    if (t.contains("populations") && !t.at("populations").is_null()) {
      const auto vec = t.at("populations").get<std::vector<double>>();
      if (vec.size() != 4) {
        throw std::invalid_argument("config: two_spin.populations needs exactly 4 entries");
      }
      cfg.two_spin.populations = std::array<double, 4>{vec[0], vec[1], vec[2], vec[3]};
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_known_keys(s, {"b_min_gauss", "b_max_gauss", "b_step_gauss"}, "sweep");
    SweepRange sweep;
    get_if_present(s, "b_min_gauss", sweep.b_min);
    get_if_present(s, "b_max_gauss", sweep.b_max);
    get_if_present(s, "b_step_gauss", sweep.b_step);
    sweep.validate();
    cfg.sweep = sweep;
  }

  if (j.contains("synthesis")) {
    const auto& s = j.at("synthesis");
    check_known_keys(s,
                     {"linewidth_mhz", "baseline", "total_dip_area", "noise_sigma", "seed",
                      "freq_margin_mhz", "freq_step_mhz", "manifold", "polarity"},
                     "synthesis");
    get_if_present(s, "linewidth_mhz", cfg.synthesis.linewidth_mhz);
    get_if_present(s, "baseline", cfg.synthesis.baseline);
    get_if_present(s, "total_dip_area", cfg.synthesis.total_dip_area);
    get_if_present(s, "noise_sigma", cfg.synthesis.noise_sigma);
    get_if_present(s, "seed", cfg.synthesis.seed);
    get_if_present(s, "freq_margin_mhz", cfg.synthesis.freq_margin_mhz);
    get_if_present(s, "freq_step_mhz", cfg.synthesis.freq_step_mhz);
    if (s.contains("manifold")) {
      const std::string v = s.at("manifold").get<std::string>();
      if (v == "ms_minus_one") {
        cfg.synthesis.manifold = Manifold::ms_minus_one;
      } else if (v == "ms_plus_one") {
        cfg.synthesis.manifold = Manifold::ms_plus_one;
      } else {
        throw std::invalid_argument("config: manifold must be ms_minus_one or ms_plus_one");
      }
    }
    if (s.contains("polarity")) {
      const std::string v = s.at("polarity").get<std::string>();
      if (v == "dips") {
        cfg.synthesis.polarity = LinePolarity::dips;
      } else if (v == "peaks") {
        cfg.synthesis.polarity = LinePolarity::peaks;
      } else {
        throw std::invalid_argument("config: polarity must be dips or peaks");
      }
    }
    if (!(cfg.synthesis.linewidth_mhz > 0.0) || !(cfg.synthesis.baseline > 0.0) ||
        !(cfg.synthesis.freq_step_mhz > 0.0) || !(cfg.synthesis.noise_sigma >= 0.0)) {
      throw std::invalid_argument("config: invalid synthesis settings");
    }
  }

  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    check_known_keys(f, {"max_iterations", "tolerance", "refit"}, "fit");
    get_if_present(f, "max_iterations", cfg.fit.max_iterations);
    get_if_present(f, "tolerance", cfg.fit.tolerance);
    get_if_present(f, "refit", cfg.fit.refit);
    if (cfg.fit.max_iterations < 1 || !(cfg.fit.tolerance > 0.0)) {
      throw std::invalid_argument("config: invalid fit settings");
    }
  }

  if (j.contains("rabi")) {
    const auto& r = j.at("rabi");
    check_known_keys(r, {"rabi_frequency_mhz", "esr_contrast", "t_max_us", "n_points",
                         "polarization"},
                     "rabi");
    get_if_present(r, "rabi_frequency_mhz", cfg.rabi.rabi_frequency_mhz);
    get_if_present(r, "esr_contrast", cfg.rabi.esr_contrast);
    get_if_present(r, "t_max_us", cfg.rabi.t_max_us);
    get_if_present(r, "n_points", cfg.rabi.n_points);
    get_optional(r, "polarization", cfg.rabi.polarization);
    if (!(cfg.rabi.rabi_frequency_mhz > 0.0) || cfg.rabi.n_points < 4 ||
        !(cfg.rabi.t_max_us > 0.0) ||
        !(cfg.rabi.esr_contrast > 0.0 && cfg.rabi.esr_contrast <= 1.0)) {
      throw std::invalid_argument("config: invalid rabi settings");
    }
  }

  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    check_known_keys(m, {"n_spins", "n_cycles", "seed", "p0", "trace_stride"}, "mc");
    get_if_present(m, "n_spins", cfg.mc.n_spins);
    get_if_present(m, "n_cycles", cfg.mc.n_cycles);
    get_if_present(m, "seed", cfg.mc.seed);
    get_if_present(m, "p0", cfg.mc.p0);
    get_if_present(m, "trace_stride", cfg.mc.trace_stride);
    if (cfg.mc.n_spins < 1 || cfg.mc.n_cycles < 1 || cfg.mc.trace_stride < 1 ||
        !(std::abs(cfg.mc.p0) <= 1.0)) {
      throw std::invalid_argument("config: invalid mc settings");
    }
  }

  if (j.contains("ode")) {
    const auto& o = j.at("ode");
    check_known_keys(o, {"enabled", "t_end", "dt", "p0"}, "ode");
    get_if_present(o, "enabled", cfg.ode.enabled);
    get_if_present(o, "t_end", cfg.ode.t_end);
    get_if_present(o, "dt", cfg.ode.dt);
    get_if_present(o, "p0", cfg.ode.p0);
    if (!(cfg.ode.t_end > 0.0) || !(cfg.ode.dt > 0.0) || !(std::abs(cfg.ode.p0) <= 1.0)) {
      throw std::invalid_argument("config: invalid ode settings");
    }
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_known_keys(o, {"dir"}, "output");
    get_if_present(o, "dir", cfg.out_dir);
  }

  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: JSON parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace nvlac
