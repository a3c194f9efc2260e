#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nvlac/csv.hpp"
#include "nvlac/hamiltonian.hpp"
#include "nvlac/pumping.hpp"
#include "nvlac/spin_system.hpp"

// Field-sweep table builders shared by the CLI commands and the
// verification suite.

namespace nvlac {

struct SweepRange {
  double b_min = 0.0;
  double b_max = 1000.0;
  double b_step = 1.0;

  void validate() const {
    if (!(b_step > 0.0)) throw std::invalid_argument("SweepRange: b_step must be > 0");
    if (!(b_min <= b_max)) throw std::invalid_argument("SweepRange: b_min must be <= b_max");
  }

  // Inclusive grid; b_min == b_max yields a single point.
  std::vector<double> points() const {
    validate();
    std::vector<double> values;
    const std::size_t n =
        static_cast<std::size_t>(std::floor((b_max - b_min) / b_step + 1e-9)) + 1;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) values.push_back(b_min + static_cast<double>(i) * b_step);
    return values;
  }
};

// One row per field point: the four eigenenergies (stable ordering
// |0,down>, |+1,up>, |plus>, |minus>), the mixing coefficients and the
// flip-probability envelope 4 a^2 b^2.
inline csv::Table eigen_sweep(const SpinSystemParams& params, const SweepRange& sweep) {
  params.validate();
  const LacPosition lac = lac_position(params);

  csv::Table table;
  table.comments.push_back("lac_position_gauss = " + csv::format_double(lac.b_gauss));
  table.comments.push_back(std::string("true_crossing = ") + (lac.true_crossing ? "1" : "0"));
  table.header = {"b_gauss", "e1_mhz", "e2_mhz", "e3_mhz", "e4_mhz", "alpha", "beta", "pmix"};
  for (const double b : sweep.points()) {
    const EigenStructure es = eigenstructure(params, FieldConfig{b});
    table.rows.push_back({b, es.e_zero_down, es.e_plus_one_up, es.e_plus, es.e_minus, es.alpha,
                          es.beta, es.p_mix()});
  }
  return table;
}

struct PolarizationSweepOptions {
  bool with_ode = false;  // append a column with the ODE long-time value
  double ode_t_end = 100.0;
  double ode_dt = 0.01;
  double ode_p0 = 0.0;
};

inline csv::Table polarization_sweep(const SpinSystemParams& params, const SweepRange& sweep,
                                     const PolarizationSweepOptions& options = {}) {
  params.validate();
  csv::Table table;
  table.header = {"b_gauss", "p_plus", "p_minus", "omega_mhz", "p_steady"};
  if (options.with_ode) table.header.push_back("p_ode");
  for (const double b : sweep.points()) {
    const FieldConfig field{b};
    const FlipProbabilities fp = flip_probabilities(params, field);
    std::vector<double> row = {b, fp.p_plus, fp.p_minus, fp.omega,
                               steady_state_polarization(params, field).p};
    if (options.with_ode) {
      const auto series =
          evolve_polarization(params, field, options.ode_p0, options.ode_t_end, options.ode_dt);
      row.push_back(series.back().state.p);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// Field of the smallest |plus>-|minus> gap on a sampled sweep (the sampled
// counterpart of the analytic lac_position).
inline double min_gap_field(const csv::Table& eigen_table) {
  const std::size_t col_b = eigen_table.column("b_gauss");
  const std::size_t col_p = eigen_table.column("e3_mhz");
  const std::size_t col_m = eigen_table.column("e4_mhz");
  if (eigen_table.rows.empty()) throw std::invalid_argument("min_gap_field: empty table");
  double best_b = eigen_table.rows.front()[col_b];
  double best_gap = std::abs(eigen_table.rows.front()[col_p] - eigen_table.rows.front()[col_m]);
  for (const auto& row : eigen_table.rows) {
    const double gap = std::abs(row[col_p] - row[col_m]);
    if (gap < best_gap) {
      best_gap = gap;
      best_b = row[col_b];
    }
  }
  return best_b;
}

}  // namespace nvlac
