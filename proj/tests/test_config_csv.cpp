#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvlac/config.hpp"
#include "nvlac/csv.hpp"
#include "nvlac/spectrum_io.hpp"
#include "nvlac/sweep.hpp"

using namespace nvlac;
using Catch::Approx;

TEST_CASE("empty config reproduces the reference parameter set") {
  const RunConfig cfg = parse_config(nlohmann::json::object());
  CHECK(cfg.spin_system.d_gs == 2870.0);
  CHECK(cfg.spin_system.d_es == -1420.0);
  CHECK(cfg.spin_system.a_gs == -3.05);
  CHECK(cfg.spin_system.a_es == 60.0);
  CHECK(cfg.spin_system.gamma_e == 2.8025);
  CHECK(cfg.spin_system.tau_es == 12.0);
  CHECK(cfg.spin_system.k_ratio == 0.009);
  CHECK(cfg.spin_system.es_hyperfine_sign == EsHyperfineSign::plus_up);
  CHECK(cfg.two_spin.a_gs_c13_mhz == 130.0);
  CHECK_FALSE(cfg.two_spin.a_es_c13_mhz.has_value());
  CHECK_FALSE(cfg.sweep.has_value());
}

TEST_CASE("config sections override selectively") {
  const auto j = nlohmann::json::parse(R"({
    "spin_system": {"k_ratio": 0.02, "es_hyperfine_sign": "plus_down"},
    "sweep": {"b_min_gauss": 450, "b_max_gauss": 550, "b_step_gauss": 0.5},
    "mc": {"n_spins": 1000, "seed": 5},
    "two_spin": {"enabled": true, "a_es_c13_mhz": 30.0}
  })");
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.spin_system.k_ratio == 0.02);
  CHECK(cfg.spin_system.es_hyperfine_sign == EsHyperfineSign::plus_down);
  CHECK(cfg.spin_system.d_gs == 2870.0);  // untouched default
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->b_min == 450.0);
  CHECK(cfg.sweep->b_step == 0.5);
  CHECK(cfg.mc.n_spins == 1000);
  CHECK(cfg.mc.n_cycles == 2000);
  CHECK(cfg.two_spin.enabled);
  CHECK(cfg.two_spin.a_es_c13_mhz == 30.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"typo_section": {}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"spin_system": {"d_gs": 1}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(nlohmann::json::parse(R"({"spin_system": {"gamma_e_mhz_per_g": -1}})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(nlohmann::json::parse(R"({"sweep": {"b_step_gauss": 0}})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(nlohmann::json::parse(R"({"spin_system": {"es_hyperfine_sign": "up"}})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(nlohmann::json::parse(R"({"two_spin": {"populations": [0.5, 0.5]}})")),
      std::invalid_argument);
}

TEST_CASE("sweep grids are inclusive and support single points") {
  SweepRange sweep{0.0, 10.0, 2.5};
  const auto pts = sweep.points();
  REQUIRE(pts.size() == 5);
  CHECK(pts.front() == 0.0);
  CHECK(pts.back() == 10.0);

  SweepRange single{42.0, 42.0, 1.0};
  const auto one = single.points();
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 42.0);

  SweepRange bad{10.0, 0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("csv round trip preserves comments, header and values") {
  csv::Table table;
  table.comments = {"lac_position_gauss = 517.4"};
  table.header = {"b_gauss", "p"};
  table.rows = {{0.0, 0.25}, {517.3951828724353, -1.25e-7}, {1000.0, 0.9636297}};

  std::ostringstream os;
  csv::write(table, os);
  std::istringstream is(os.str());
  const csv::Table back = csv::read(is);

  REQUIRE(back.header == table.header);
  REQUIRE(back.comments == table.comments);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.rows[i].size(); ++j) {
      CHECK(back.rows[i][j] == Approx(table.rows[i][j]).epsilon(1e-11));
    }
  }
  CHECK(back.column("p") == 1);
  CHECK_THROWS_AS(back.column("missing"), std::invalid_argument);
}

TEST_CASE("csv rejects malformed content") {
  std::istringstream no_header("");
  CHECK_THROWS_AS(csv::read(no_header), std::invalid_argument);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(csv::read(ragged), std::invalid_argument);

  std::istringstream text_field("a,b\n1,x\n");
  CHECK_THROWS_AS(csv::read(text_field), std::invalid_argument);
}

TEST_CASE("numeric formatting is locale-independent and round-trips") {
  CHECK(csv::format_double(0.5) == "0.5");
  CHECK(csv::format_double(-1.25e-7) == "-1.25e-07");
  CHECK(csv::format_double(2870.0) == "2870");
  const double v = 517.3951828724353;
  CHECK(std::stod(csv::format_double(v)) == Approx(v).epsilon(1e-11));
}

TEST_CASE("eigen sweep table carries the anti-crossing metadata") {
  const csv::Table table = eigen_sweep(SpinSystemParams{}, SweepRange{0.0, 10.0, 5.0});
  REQUIRE(table.comments.size() == 2);
  CHECK(table.comments[0].find("lac_position_gauss") != std::string::npos);
  CHECK(table.header ==
        std::vector<std::string>{"b_gauss", "e1_mhz", "e2_mhz", "e3_mhz", "e4_mhz", "alpha",
                                 "beta", "pmix"});
  REQUIRE(table.rows.size() == 3);
}

TEST_CASE("polarization sweep optionally carries the ode column") {
  const SweepRange sweep{500.0, 502.0, 1.0};
  const csv::Table plain = polarization_sweep(SpinSystemParams{}, sweep);
  CHECK(plain.header == std::vector<std::string>{"b_gauss", "p_plus", "p_minus", "omega_mhz",
                                                 "p_steady"});
  PolarizationSweepOptions options;
  options.with_ode = true;
  const csv::Table with_ode = polarization_sweep(SpinSystemParams{}, sweep, options);
  REQUIRE(with_ode.header.size() == 6);
  CHECK(with_ode.header.back() == "p_ode");
  for (const auto& row : with_ode.rows) {
    CHECK(row[5] == Approx(row[4]).margin(1e-6));
  }
}

TEST_CASE("spectrum import/export round-trips through the documented schema") {
  nvlac::Spectrum spec;
  spec.frequencies = {1466.0, 1467.0, 1468.0, 1469.0};
  spec.intensities = {1.0, 0.84, 0.91, 0.99};

  const std::string path = "nvlac_test_spectrum_io.csv";
  nvlac::write_spectrum_csv(spec, path);
  const nvlac::Spectrum back = nvlac::read_spectrum_csv(path);
  std::remove(path.c_str());

  REQUIRE(back.frequencies.size() == spec.frequencies.size());
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i) {
    CHECK(back.frequencies[i] == Approx(spec.frequencies[i]).epsilon(1e-11));
    CHECK(back.intensities[i] == Approx(spec.intensities[i]).epsilon(1e-11));
  }

  nvlac::csv::Table bad;
  bad.header = {"freq_mhz", "intensity"};
  bad.rows = {{2.0, 1.0}, {1.0, 1.0}};  // grid not increasing
  CHECK_THROWS_AS(nvlac::spectrum_from_table(bad), std::invalid_argument);
}

TEST_CASE("config file loading surfaces parse errors") {
  const std::string path = "nvlac_test_bad_config.json";
  {
    std::ofstream os(path);
    os << "{ not json";
  }
  CHECK_THROWS_AS(load_config(path), std::invalid_argument);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("definitely_missing_config.json"), std::invalid_argument);
}
