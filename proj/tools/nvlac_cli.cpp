// nvlac: simulator and analysis tool for optically pumped single-nuclear-spin
// polarization at the excited-state level anti-crossing of the NV center.
//
// Subcommands: eigen, polarization, fit-kratio, spectrum, rabi, mc.
// Exit codes: 0 success, 1 usage/config error, 2 numerical non-convergence,
// 3 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nvlac/config.hpp"
#include "nvlac/csv.hpp"
#include "nvlac/hamiltonian.hpp"
#include "nvlac/kratio_fit.hpp"
#include "nvlac/monte_carlo.hpp"
#include "nvlac/pumping.hpp"
#include "nvlac/rabi.hpp"
#include "nvlac/spectra.hpp"
#include "nvlac/spectrum_fit.hpp"
#include "nvlac/spectrum_io.hpp"
#include "nvlac/sweep.hpp"
#include "nvlac/two_spin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<double> b_min, b_max, b_step;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool gnuplot = false;
};

nvlac::RunConfig make_config(const CliOverrides& ov) {
  nvlac::RunConfig cfg =
      ov.config_path ? nvlac::load_config(*ov.config_path) : nvlac::RunConfig{};
  if (ov.b_min || ov.b_max || ov.b_step) {
    nvlac::SweepRange sweep = cfg.sweep_or({});
    if (ov.b_min) sweep.b_min = *ov.b_min;
    if (ov.b_max) sweep.b_max = *ov.b_max;
    if (ov.b_step) sweep.b_step = *ov.b_step;
    sweep.validate();
    cfg.sweep = sweep;
  }
  if (ov.seed) {
    cfg.synthesis.seed = *ov.seed;
    cfg.mc.seed = *ov.seed;
  }
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  return cfg;
}

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON configuration file");
  cmd->add_option("--b-min", ov.b_min, "sweep start, Gauss");
  cmd->add_option("--b-max", ov.b_max, "sweep end, Gauss");
  cmd->add_option("--b-step", ov.b_step, "sweep step, Gauss");
  cmd->add_option("--seed", ov.seed, "random seed override");
  cmd->add_option("--out", ov.out_dir, "output directory");
  cmd->add_flag("--gnuplot", ov.gnuplot, "also emit a gnuplot script");
}

fs::path ensure_out_dir(const nvlac::RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw nvlac::IoError("cannot create output directory '" + cfg.out_dir + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw nvlac::IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os.good()) throw nvlac::IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Manifest: the one artifact allowed to change between identical reruns
// (it carries the timestamp); every data file is byte-stable.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& files,
                    const std::vector<std::string>& warnings,
                    const std::vector<std::string>& errors) {
  json manifest;
  manifest["command"] = command;
  manifest["generated_at"] = utc_timestamp();
  manifest["files"] = files;
  manifest["warnings"] = warnings;
  manifest["errors"] = errors;
  write_json(dir / "manifest.json", manifest);
}

std::string field_tag(double b) { return "b" + nvlac::csv::format_double(b); }

json line_to_json(const nvlac::LorentzianLine& line) {
  return json{{"center_mhz", line.center},
              {"width_mhz", line.width},
              {"area", line.area},
              {"label", line.label}};
}

// ---------------------------------------------------------------------------
// eigen
// ---------------------------------------------------------------------------

int run_eigen(const nvlac::RunConfig& cfg, bool gnuplot) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::SweepRange sweep = cfg.sweep_or({0.0, 1000.0, 1.0});
  const nvlac::csv::Table table = nvlac::eigen_sweep(cfg.spin_system, sweep);
  nvlac::csv::write_file(table, (dir / "eigen.csv").string());

  std::vector<std::string> files = {"eigen.csv"};
  if (gnuplot) {
    write_text(dir / "eigen.gp",
               "set datafile separator ','\n"
               "set xlabel 'B (G)'\n"
               "set ylabel 'E (MHz)'\n"
               "plot 'eigen.csv' u 1:2 w l t '|0,down>', '' u 1:3 w l t '|+1,up>', \\\n"
               "     '' u 1:4 w l t '|plus>', '' u 1:5 w l t '|minus>'\n");
    files.push_back("eigen.gp");
  }
  write_manifest(dir, "eigen", files, {}, {});

  const nvlac::LacPosition lac = nvlac::lac_position(cfg.spin_system);
  std::cout << "eigen: " << table.rows.size() << " field points, anti-crossing at "
            << nvlac::csv::format_double(lac.b_gauss) << " G"
            << (lac.true_crossing ? " (true crossing)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// polarization
// ---------------------------------------------------------------------------

int run_polarization(const nvlac::RunConfig& cfg, bool gnuplot) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::SweepRange sweep = cfg.sweep_or({0.0, 600.0, 1.0});
  nvlac::PolarizationSweepOptions options;
  options.with_ode = cfg.ode.enabled;
  options.ode_t_end = cfg.ode.t_end;
  options.ode_dt = cfg.ode.dt;
  options.ode_p0 = cfg.ode.p0;
  const nvlac::csv::Table table = nvlac::polarization_sweep(cfg.spin_system, sweep, options);
  nvlac::csv::write_file(table, (dir / "polarization.csv").string());

  std::vector<std::string> files = {"polarization.csv"};
  if (gnuplot) {
    write_text(dir / "polarization.gp",
               "set datafile separator ','\n"
               "set xlabel 'B (G)'\n"
               "set ylabel 'P'\n"
               "plot 'polarization.csv' u 1:5 w l t 'steady state'\n");
    files.push_back("polarization.gp");
  }
  write_manifest(dir, "polarization", files, {}, {});
  std::cout << "polarization: " << table.rows.size() << " field points written\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit-kratio
// ---------------------------------------------------------------------------

int run_fit_kratio(const nvlac::RunConfig& cfg, const std::string& data_path) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::csv::Table data = nvlac::csv::read_file(data_path);
  const std::size_t col_b = data.column("b_gauss");
  const std::size_t col_p = data.column("p");
  const std::size_t col_s = data.column("sigma");

  std::vector<nvlac::PolarizationDataPoint> points;
  points.reserve(data.rows.size());
  for (const auto& row : data.rows) points.push_back({row[col_b], row[col_p], row[col_s]});

  const nvlac::FitResult result = nvlac::fit_kratio(cfg.spin_system, points, cfg.fit.levmar());

  std::vector<std::string> warnings;
  if (!result.brackets_lac) {
    warnings.push_back("data does not bracket the level anti-crossing field");
  }
  if (!result.converged) warnings.push_back("fit did not converge; values are advisory");
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  json report;
  report["parameters"] = json::array();
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    report["parameters"].push_back(json{{"name", result.parameter_names[i]},
                                        {"value", result.values[i]},
                                        {"std_error", result.std_errors[i]}});
  }
  report["residual_norm"] = result.residual_norm;
  report["iterations"] = result.iterations;
  report["converged"] = result.converged;
  report["advisory"] = !result.converged;
  report["n_points"] = points.size();
  write_json(dir / "fit_kratio.json", report);
  write_manifest(dir, "fit-kratio", {"fit_kratio.json"}, warnings, {});

  std::cout << "fit-kratio: k_ratio = " << nvlac::csv::format_double(result.values[0]) << " +- "
            << nvlac::csv::format_double(result.std_errors[0])
            << (result.converged ? "" : " (advisory, not converged)") << "\n";
  return result.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

struct SpectrumPointOutcome {
  json report;
  std::optional<std::string> error;
};

SpectrumPointOutcome process_spectrum_point(const nvlac::RunConfig& cfg, double b,
                                            std::uint64_t seed, const fs::path& dir,
                                            const std::string& csv_name) {
  const nvlac::FieldConfig field{b};
  const nvlac::SynthesisConfig& syn = cfg.synthesis;

  std::vector<nvlac::LorentzianLine> lines;
  json model;
  std::string up_label, down_label, target_label;
  bool two_spin = cfg.two_spin.enabled;

  if (two_spin) {
    const nvlac::TwoSpinParams params = cfg.two_spin.params(cfg.spin_system);
    const auto positions = nvlac::two_spin_line_positions(params, field, syn.manifold);
    nvlac::TwoSpinPopulations pops;
    if (cfg.two_spin.populations) {
      pops.rho = *cfg.two_spin.populations;
      pops.validate();
    } else {
      pops = nvlac::two_spin_steady_state(params, field);
    }
    for (const auto& pos : positions) {
      nvlac::LorentzianLine line;
      line.center = pos.frequency;
      line.width = syn.linewidth_mhz;
      line.area = syn.total_dip_area * pops[pos.orientation];
      line.label = pos.label;
      lines.push_back(line);
    }
    target_label = nvlac::joint_orientation_labels[0];  // N_down_C_down
    model["populations"] = pops.rho;
    model["nitrogen_polarization"] = pops.nitrogen_polarization();
    model["carbon_polarization"] = pops.carbon_polarization();
    model["joint_polarization_target_vs_rest"] =
        nvlac::joint_polarization(pops, nvlac::JointOrientation::down_down);
    model["joint_polarization_marginal_product"] =
        nvlac::marginal_product_polarization(pops);
    model["joint_definition"] = "target_vs_rest";
    model["target_label"] = target_label;
  } else {
    const nvlac::EsrLines esr =
        nvlac::ground_esr_frequencies(cfg.spin_system, field, syn.manifold);
    const nvlac::PolarizationState state =
        nvlac::steady_state_polarization(cfg.spin_system, field);
    up_label = "up";
    down_label = "down";
    lines.push_back({esr.nu_up, syn.linewidth_mhz, syn.total_dip_area * state.population_up,
                     up_label});
    lines.push_back({esr.nu_down, syn.linewidth_mhz,
                     syn.total_dip_area * state.population_down, down_label});
    model["p_steady"] = state.p;
    model["population_up"] = state.population_up;
    model["population_down"] = state.population_down;
  }

  double lo = lines.front().center, hi = lines.front().center;
  for (const auto& line : lines) {
    lo = std::min(lo, line.center);
    hi = std::max(hi, line.center);
  }
  const std::vector<double> grid = nvlac::uniform_grid(
      lo - syn.freq_margin_mhz, hi + syn.freq_margin_mhz, syn.freq_step_mhz);

  const nvlac::Spectrum spectrum = nvlac::synthesize_spectrum(
      lines, grid, syn.baseline, syn.noise_sigma, seed, syn.polarity);

  nvlac::csv::Table table = nvlac::spectrum_to_table(spectrum);
  table.comments.push_back("b_gauss = " + nvlac::csv::format_double(b));
  nvlac::csv::write_file(table, (dir / csv_name).string());

  SpectrumPointOutcome outcome;
  outcome.report["b_gauss"] = b;
  outcome.report["csv"] = csv_name;
  outcome.report["model"] = model;
  outcome.report["lines_true"] = json::array();
  for (const auto& line : lines) outcome.report["lines_true"].push_back(line_to_json(line));
  if (spectrum.clipped) outcome.report["clipped"] = true;

  if (!cfg.fit.refit) return outcome;

  try {
    // Model-informed initialization: line positions and widths are known to
    // the pipeline; the areas start from an even split so the fit genuinely
    // determines them (dip detection cannot seed a nearly vanished line).
    std::vector<nvlac::LorentzianLine> guesses = lines;
    for (auto& g : guesses) {
      g.area = syn.total_dip_area / static_cast<double>(guesses.size());
    }
    const nvlac::SpectrumFit fit = nvlac::fit_spectrum(
        spectrum, lines.size(),
        nvlac::SpectrumFitInit::from_guesses(guesses, syn.baseline), cfg.fit.levmar(),
        syn.polarity);
    json fit_json;
    fit_json["converged"] = fit.converged;
    fit_json["residual_norm"] = fit.residual_norm;
    fit_json["iterations"] = fit.iterations;
    fit_json["baseline"] = fit.baseline;
    fit_json["lines"] = json::array();
    for (std::size_t i = 0; i < fit.spectrum.lines.size(); ++i) {
      json lj = line_to_json(fit.spectrum.lines[i]);
      if (fit.covariance_ok) {
        lj["area_sigma"] = std::sqrt(std::max(fit.area_variance(i), 0.0));
      }
      fit_json["lines"].push_back(lj);
    }

    if (two_spin) {
      double total = 0.0, target_area = 0.0;
      nvlac::TwoSpinPopulations fitted_pops;
      for (const auto& line : fit.spectrum.lines) total += line.area;
      if (total > 0.0) {
        for (const auto& line : fit.spectrum.lines) {
          if (line.label == target_label) target_area = line.area;
          for (std::size_t o = 0; o < 4; ++o) {
            if (line.label == nvlac::joint_orientation_labels[o]) {
              fitted_pops.rho[o] = line.area / total;
            }
          }
        }
        fit_json["joint_polarization_target_vs_rest"] = (2.0 * target_area - total) / total;
        fit_json["joint_polarization_marginal_product"] =
            fitted_pops.nitrogen_polarization() * fitted_pops.carbon_polarization();
        fit_json["joint_definition"] = "target_vs_rest";
      }
    } else {
      const nvlac::PolarizationEstimate est =
          nvlac::fit_polarization(fit, up_label, down_label);
      fit_json["polarization"] = est.p;
      if (est.sigma) fit_json["polarization_sigma"] = *est.sigma;
    }
    outcome.report["fit"] = fit_json;
  } catch (const std::exception& e) {
    outcome.error = e.what();
    outcome.report["fit_error"] = e.what();
  }
  return outcome;
}

int run_spectrum(const nvlac::RunConfig& cfg, bool gnuplot) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::SweepRange sweep = cfg.sweep_or({500.0, 500.0, 1.0});

  std::vector<std::string> files;
  std::vector<std::string> errors;
  json reports = json::array();
  std::size_t index = 0;
  for (const double b : sweep.points()) {
    const std::string tag = field_tag(b);
    const std::string csv_name = "spectrum_" + tag + ".csv";
    const std::uint64_t seed = nvlac::detail::splitmix64(cfg.synthesis.seed ^ index);
    // fit failures are recorded per point; the batch continues
    const SpectrumPointOutcome outcome = process_spectrum_point(cfg, b, seed, dir, csv_name);
    files.push_back(csv_name);
    if (outcome.error) {
      errors.push_back(tag + ": " + *outcome.error);
      std::cerr << "warning: fit failed at " << tag << ": " << *outcome.error << "\n";
    }
    reports.push_back(outcome.report);
    ++index;
  }

  write_json(dir / "spectrum_report.json", reports);
  files.push_back("spectrum_report.json");
  if (gnuplot && !sweep.points().empty()) {
    write_text(dir / "spectrum.gp",
               "set datafile separator ','\n"
               "set xlabel 'frequency (MHz)'\n"
               "set ylabel 'photoluminescence (arb.)'\n"
               "plot 'spectrum_" + field_tag(sweep.points().front()) +
                   ".csv' u 1:2 w l t 'spectrum'\n");
    files.push_back("spectrum.gp");
  }
  write_manifest(dir, "spectrum", files, {}, errors);
  std::cout << "spectrum: " << reports.size() << " field point(s) processed, "
            << errors.size() << " fit failure(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rabi
// ---------------------------------------------------------------------------

int run_rabi(const nvlac::RunConfig& cfg, bool gnuplot) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::SweepRange sweep = cfg.sweep_or({500.0, 500.0, 1.0});

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(cfg.rabi.n_points));
  for (int i = 0; i < cfg.rabi.n_points; ++i) {
    times.push_back(cfg.rabi.t_max_us * static_cast<double>(i) /
                    static_cast<double>(cfg.rabi.n_points - 1));
  }

  std::vector<std::string> files;
  json reports = json::array();
  for (const double b : sweep.points()) {
    const nvlac::FieldConfig field{b};
    const double p = cfg.rabi.polarization
                         ? *cfg.rabi.polarization
                         : nvlac::steady_state_polarization(cfg.spin_system, field).p;
    const nvlac::EsrLines esr =
        nvlac::ground_esr_frequencies(cfg.spin_system, field, cfg.synthesis.manifold);

    const nvlac::RabiTrace down =
        nvlac::synthesize_rabi(p, nvlac::NuclearLine::down, cfg.rabi.rabi_frequency_mhz,
                               cfg.rabi.esr_contrast, times, esr.nu_down);
    const nvlac::RabiTrace up =
        nvlac::synthesize_rabi(p, nvlac::NuclearLine::up, cfg.rabi.rabi_frequency_mhz,
                               cfg.rabi.esr_contrast, times, esr.nu_up);

    const std::string csv_name = "rabi_" + field_tag(b) + ".csv";
    nvlac::csv::Table table;
    table.comments.push_back("b_gauss = " + nvlac::csv::format_double(b));
    table.comments.push_back("mw_down_mhz = " + nvlac::csv::format_double(esr.nu_down));
    table.comments.push_back("mw_up_mhz = " + nvlac::csv::format_double(esr.nu_up));
    table.header = {"time_us", "signal_down", "signal_up"};
    for (std::size_t i = 0; i < times.size(); ++i) {
      table.rows.push_back({times[i], down.signal[i], up.signal[i]});
    }
    nvlac::csv::write_file(table, (dir / csv_name).string());
    files.push_back(csv_name);

    json rj;
    rj["b_gauss"] = b;
    rj["csv"] = csv_name;
    rj["polarization"] = p;
    rj["contrast_down_true"] = down.contrast;
    rj["contrast_up_true"] = up.contrast;
    rj["contrast_ratio_expected"] = (1.0 - p) / (1.0 + p);

    const nvlac::RabiFit fit_down = nvlac::fit_rabi(down, cfg.fit.levmar());
    const nvlac::RabiFit fit_up = nvlac::fit_rabi(up, cfg.fit.levmar());
    rj["fit_down"] = {{"rabi_frequency_mhz", fit_down.rabi_frequency},
                      {"contrast", fit_down.contrast},
                      {"frequency_determinate", fit_down.frequency_determinate}};
    rj["fit_up"] = {{"rabi_frequency_mhz", fit_up.rabi_frequency},
                    {"contrast", fit_up.contrast},
                    {"frequency_determinate", fit_up.frequency_determinate}};
    if (fit_down.contrast > 0.0) {
      rj["contrast_ratio_fitted"] = fit_up.contrast / fit_down.contrast;
    }
    reports.push_back(rj);
  }

  write_json(dir / "rabi_report.json", reports);
  files.push_back("rabi_report.json");
  if (gnuplot && !sweep.points().empty()) {
    write_text(dir / "rabi.gp",
               "set datafile separator ','\n"
               "set xlabel 'pulse duration (us)'\n"
               "set ylabel 'signal (norm.)'\n"
               "plot 'rabi_" + field_tag(sweep.points().front()) +
                   ".csv' u 1:2 w lp t 'down line', '' u 1:3 w lp t 'up line'\n");
    files.push_back("rabi.gp");
  }
  write_manifest(dir, "rabi", files, {}, {});
  std::cout << "rabi: " << reports.size() << " field point(s) processed\n";
  return 0;
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

int run_mc(const nvlac::RunConfig& cfg, bool gnuplot) {
  const fs::path dir = ensure_out_dir(cfg);
  const nvlac::SweepRange sweep = cfg.sweep_or({500.0, 500.0, 1.0});

  std::vector<std::string> files;
  json reports = json::array();
  std::size_t index = 0;
  for (const double b : sweep.points()) {
    const nvlac::FieldConfig field{b};
    const std::uint64_t seed = nvlac::detail::splitmix64(cfg.mc.seed ^ index);
    const auto [result, trace] = nvlac::monte_carlo_trace(
        cfg.spin_system, field, cfg.mc.n_spins, cfg.mc.n_cycles, seed, cfg.mc.p0,
        cfg.mc.trace_stride);

    const std::string csv_name = "mc_trace_" + field_tag(b) + ".csv";
    nvlac::csv::Table table;
    table.comments.push_back("b_gauss = " + nvlac::csv::format_double(b));
    table.comments.push_back("seed = " + std::to_string(seed));
    table.header = {"cycle", "p_mean", "std_error"};
    for (const auto& pt : trace) {
      table.rows.push_back({static_cast<double>(pt.cycle), pt.p_mean, pt.std_error});
    }
    nvlac::csv::write_file(table, (dir / csv_name).string());
    files.push_back(csv_name);

    const double p_eq = nvlac::steady_state_polarization(cfg.spin_system, field).p;
    json rj;
    rj["b_gauss"] = b;
    rj["csv"] = csv_name;
    rj["n_spins"] = result.n_spins;
    rj["n_cycles"] = result.n_cycles;
    rj["seed"] = seed;
    rj["p_initial"] = result.initial_p;
    rj["p_final"] = result.state.p;
    rj["std_error"] = result.std_error;
    rj["p_steady_closed_form"] = p_eq;
    rj["abs_difference"] = std::abs(result.state.p - p_eq);
    rj["within_3_std_errors"] = std::abs(result.state.p - p_eq) <= 3.0 * result.std_error;
    reports.push_back(rj);
    ++index;
  }

  write_json(dir / "mc_report.json", reports);
  files.push_back("mc_report.json");
  if (gnuplot && !sweep.points().empty()) {
    write_text(dir / "mc.gp",
               "set datafile separator ','\n"
               "set xlabel 'pump cycle'\n"
               "set ylabel 'P'\n"
               "plot 'mc_trace_" + field_tag(sweep.points().front()) +
                   ".csv' u 1:2 w l t 'ensemble mean'\n");
    files.push_back("mc.gp");
  }
  write_manifest(dir, "mc", files, {}, {});
  std::cout << "mc: " << reports.size() << " field point(s) processed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV excited-state level-anti-crossing nuclear-polarization toolkit"};
  app.require_subcommand(1);

  CliOverrides ov;
  std::string data_path;

  CLI::App* cmd_eigen = app.add_subcommand(
      "eigen", "field sweep of the excited-state eigenenergies and mixing");
  CLI::App* cmd_pol = app.add_subcommand(
      "polarization", "flip probabilities and steady-state polarization vs field");
  CLI::App* cmd_fit = app.add_subcommand(
      "fit-kratio", "fit the depolarization ratio to polarization-vs-field data");
  CLI::App* cmd_spec = app.add_subcommand(
      "spectrum", "synthesize (and refit) ODMR spectra at the requested fields");
  CLI::App* cmd_rabi = app.add_subcommand(
      "rabi", "selective Rabi nutation traces for both nuclear orientations");
  CLI::App* cmd_mc = app.add_subcommand(
      "mc", "stochastic ensemble cross-check of the rate model");
  for (CLI::App* cmd : {cmd_eigen, cmd_pol, cmd_fit, cmd_spec, cmd_rabi, cmd_mc}) {
    add_common_options(cmd, ov);
  }
  cmd_fit->add_option("--data", data_path, "CSV with columns b_gauss,p,sigma")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const nvlac::RunConfig cfg = make_config(ov);
    if (cmd_eigen->parsed()) return run_eigen(cfg, ov.gnuplot);
    if (cmd_pol->parsed()) return run_polarization(cfg, ov.gnuplot);
    if (cmd_fit->parsed()) return run_fit_kratio(cfg, data_path);
    if (cmd_spec->parsed()) return run_spectrum(cfg, ov.gnuplot);
    if (cmd_rabi->parsed()) return run_rabi(cfg, ov.gnuplot);
    if (cmd_mc->parsed()) return run_mc(cfg, ov.gnuplot);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const nvlac::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const nvlac::SpectrumFitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
