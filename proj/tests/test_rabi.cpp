#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nvlac/rabi.hpp"
#include "oracles.hpp"

using namespace nvlac;
using Catch::Approx;

namespace {
std::vector<double> time_grid(double t_max, int n) {
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.push_back(t_max * i / (n - 1));
  return t;
}
}  // namespace

TEST_CASE("unpolarized spins give equal contrast on both lines") {
  const auto t = time_grid(3.0, 200);
  const RabiTrace down = synthesize_rabi(0.0, NuclearLine::down, 1.0, 0.3, t);
  const RabiTrace up = synthesize_rabi(0.0, NuclearLine::up, 1.0, 0.3, t);
  CHECK(down.contrast == Approx(0.15).margin(1e-15));
  CHECK(up.contrast == Approx(0.15).margin(1e-15));
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(down.signal[i] == Approx(up.signal[i]).margin(1e-15));
  }
}

TEST_CASE("full polarization flattens the up line and doubles the down line") {
  const auto t = time_grid(3.0, 200);
  const RabiTrace down = synthesize_rabi(1.0, NuclearLine::down, 1.0, 0.3, t);
  const RabiTrace up = synthesize_rabi(1.0, NuclearLine::up, 1.0, 0.3, t);
  CHECK(down.contrast == Approx(0.3).margin(1e-15));  // twice the unpolarized value
  CHECK(up.contrast == 0.0);
  for (const double s : up.signal) CHECK(s == 1.0);
}

TEST_CASE("contrast ratio equals (1-P)/(1+P) exactly") {
  const auto t = time_grid(2.0, 50);
  for (double p = 0.0; p < 1.0; p += 0.07) {
    const RabiTrace down = synthesize_rabi(p, NuclearLine::down, 2.0, 0.25, t);
    const RabiTrace up = synthesize_rabi(p, NuclearLine::up, 2.0, 0.25, t);
    CHECK(up.contrast / down.contrast == Approx((1.0 - p) / (1.0 + p)).margin(1e-14));
    CHECK(rabi_contrast_ratio(p) == Approx((1.0 - p) / (1.0 + p)).margin(1e-15));
  }
  CHECK(rabi_contrast_ratio(0.98) == Approx(0.0101010101).epsilon(1e-6));
}

TEST_CASE("noiseless cosine fit recovers frequency and contrast exactly") {
  const auto t = time_grid(4.0, 321);
  const RabiTrace trace = synthesize_rabi(0.4, NuclearLine::down, 1.3, 0.3, t);
  const RabiFit fit = fit_rabi(trace);
  CHECK(fit.converged);
  CHECK(fit.frequency_determinate);
  CHECK(fit.rabi_frequency == Approx(1.3).epsilon(1e-6));
  CHECK(fit.contrast == Approx(trace.contrast).epsilon(1e-6));
  CHECK(fit.residual_norm < 1e-6);
}

TEST_CASE("flat trace reports zero contrast and an indeterminate frequency") {
  const auto t = time_grid(3.0, 100);
  const RabiTrace flat = synthesize_rabi(1.0, NuclearLine::up, 1.0, 0.3, t);
  const RabiFit fit = fit_rabi(flat);
  CHECK(fit.contrast == 0.0);
  CHECK_FALSE(fit.frequency_determinate);
}

TEST_CASE("frequency recovery within 1% over 100 noisy trials") {
  // 5 periods, 2% amplitude noise
  const double f_true = 1.0;
  const auto t = time_grid(5.0, 251);
  int failures = 0;
  oracles::TestRng rng(314);
  for (int trial = 0; trial < 100; ++trial) {
    RabiTrace trace = synthesize_rabi(0.2, NuclearLine::down, f_true, 0.3, t);
    for (double& s : trace.signal) s += 0.02 * rng.gaussian();
    try {
      const RabiFit fit = fit_rabi(trace);
      if (std::abs(fit.rabi_frequency - f_true) > 0.01 * f_true) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("densely oversampled traces still land in the right frequency basin") {
  // Nyquist far above the true frequency; the scan has to stay fine enough
  const auto t = time_grid(1.0, 2001);
  const RabiTrace trace = synthesize_rabi(0.1, NuclearLine::down, 3.7, 0.3, t);
  const RabiFit fit = fit_rabi(trace);
  CHECK(fit.rabi_frequency == Approx(3.7).epsilon(1e-6));
}

TEST_CASE("rabi synthesis validates its inputs") {
  const auto t = time_grid(1.0, 10);
  CHECK_THROWS_AS(synthesize_rabi(0.5, NuclearLine::down, 0.0, 0.3, t), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_rabi(0.5, NuclearLine::down, 1.0, 0.0, t), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_rabi(1.5, NuclearLine::down, 1.0, 0.3, t), std::invalid_argument);
}
