#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "nvlac/pumping.hpp"
#include "oracles.hpp"

using namespace nvlac;
using Catch::Approx;

namespace {
SpinSystemParams defaults() { return SpinSystemParams{}; }
}  // namespace

TEST_CASE("flip probabilities at the exact anti-crossing") {
  const SpinSystemParams params = defaults();
  const double b_lac = lac_position(params).b_gauss;
  const FlipProbabilities fp = flip_probabilities(params, FieldConfig{b_lac});

  CHECK(fp.omega == Approx(60.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(fp.p_plus == Approx(0.5).margin(1e-12));
  // precession stays faster than the excited-state decay even here
  CHECK(fp.fast_precession);
}

TEST_CASE("flip probabilities are symmetric at zero field") {
  const FlipProbabilities fp = flip_probabilities(defaults(), FieldConfig{0.0});
  CHECK(fp.p_plus == fp.p_minus);
}

TEST_CASE("flip probabilities at 500 G match the frozen closed-form values") {
  const FlipProbabilities fp = flip_probabilities(defaults(), FieldConfig{500.0});
  // frozen from an independent arbitrary-precision evaluation; the library
  // route goes through the eigenvector components, so allow for a few ulp
  // of accumulated roundoff
  CHECK(fp.p_plus == Approx(0.37591776798825257).epsilon(1e-11));
  CHECK(fp.p_minus == Approx(4.4243292791703768e-4).epsilon(1e-11));
  CHECK(fp.omega == Approx(48.929956315124582).epsilon(1e-11));
}

TEST_CASE("p_minus(B) equals p_plus(-B) exactly") {
  oracles::TestRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double b = -1000.0 + 2000.0 * rng.uniform();
    const FlipProbabilities at_b = flip_probabilities(defaults(), FieldConfig{b});
    const FlipProbabilities at_minus_b = flip_probabilities(defaults(), FieldConfig{-b});
    CHECK(at_b.p_minus == at_minus_b.p_plus);
    CHECK(at_b.p_plus == at_minus_b.p_minus);
    CHECK(at_b.p_plus <= 0.5);
    CHECK(at_b.p_minus <= 0.5);
  }
}

TEST_CASE("steady state is unpolarized at zero field") {
  for (const double k : {1e-4, 0.009, 0.5}) {
    SpinSystemParams params = defaults();
    params.k_ratio = k;
    CHECK(steady_state_polarization(params, FieldConfig{0.0}).p == Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("steady state at 500 G and the sweep maximum") {
  const PolarizationState state = steady_state_polarization(defaults(), FieldConfig{500.0});
  // frozen from an independent arbitrary-precision evaluation of the
  // steady-state expression
  CHECK(state.p == Approx(0.95211264774700607).epsilon(1e-13));
  CHECK(state.population_down + state.population_up == Approx(1.0).margin(1e-12));
  CHECK(state.population_down - state.population_up == Approx(state.p).margin(1e-12));

  double max_p = 0.0;
  for (double b = 400.0; b <= 550.0; b += 0.25) {
    max_p = std::max(max_p, steady_state_polarization(defaults(), FieldConfig{b}).p);
  }
  CHECK(max_p == Approx(0.96362972).margin(5e-6));
  CHECK(max_p < 0.97);  // the model peaks below the top measured value
}

TEST_CASE("steady state reduces to the pumping-only limit at k_ratio = 0") {
  SpinSystemParams params = defaults();
  params.k_ratio = 0.0;
  const FlipProbabilities fp = flip_probabilities(params, FieldConfig{500.0});
  const double expected = (fp.p_plus - fp.p_minus) / (fp.p_plus + fp.p_minus);
  CHECK(steady_state_polarization(params, FieldConfig{500.0}).p ==
        Approx(expected).epsilon(1e-13));
  CHECK(expected == Approx(1.0 - 2.0 * fp.p_minus / fp.p_plus).epsilon(1e-3));

  // long-time ODE limit agrees
  const auto series = evolve_polarization(params, FieldConfig{500.0}, 0.0, 120.0, 0.01);
  CHECK(series.back().state.p == Approx(expected).margin(1e-8));
}

TEST_CASE("steady state rejects the fully degenerate input") {
  SpinSystemParams params = defaults();
  params.k_ratio = 0.0;
  params.a_es = 0.0;
  CHECK_THROWS_AS(steady_state_polarization(params, FieldConfig{300.0}), std::domain_error);
}

TEST_CASE("steady state stays within [-1, 1] and is antisymmetric in B") {
  oracles::TestRng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    SpinSystemParams params = defaults();
    params.k_ratio = 0.2 * rng.uniform();
    const double b = -800.0 + 1600.0 * rng.uniform();
    double p = 0.0;
    try {
      p = steady_state_polarization(params, FieldConfig{b}).p;
    } catch (const std::domain_error&) {
      continue;
    }
    CHECK(std::abs(p) <= 1.0);
    const double p_reflected = steady_state_polarization(params, FieldConfig{-b}).p;
    CHECK(p_reflected == Approx(-p).margin(1e-15));
  }
}

TEST_CASE("steady state decreases with k_ratio where pumping dominates") {
  double prev = 1.0;
  for (const double k : {0.001, 0.005, 0.02, 0.1, 0.3}) {
    SpinSystemParams params = defaults();
    params.k_ratio = k;
    const double p = steady_state_polarization(params, FieldConfig{480.0}).p;
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("polarization maximum sits at the mixing maximum within 2 G") {
  for (const double k : {0.001, 0.009, 0.05}) {
    SpinSystemParams params = defaults();
    params.k_ratio = k;

    double best_b_pol = 0.0, best_pol = -2.0;
    double best_b_mix = 0.0, best_mix = -1.0;
    for (double b = 400.0; b <= 620.0; b += 0.25) {
      const double p = steady_state_polarization(params, FieldConfig{b}).p;
      if (p > best_pol) {
        best_pol = p;
        best_b_pol = b;
      }
      const double mix = eigenstructure(params, FieldConfig{b}).p_mix();
      if (mix > best_mix) {
        best_mix = mix;
        best_b_mix = b;
      }
    }
    CHECK(std::abs(best_b_pol - best_b_mix) <= 2.0);
  }
}

TEST_CASE("ode holds steady when started at the fixed point") {
  const SpinSystemParams params = defaults();
  const FieldConfig field{470.0};
  const double p_star = steady_state_polarization(params, field).p;
  const auto series = evolve_polarization(params, field, p_star, 10.0, 0.01);
  for (const auto& sample : series) {
    CHECK(sample.state.p == Approx(p_star).margin(1e-12));
  }
}

TEST_CASE("ode converges to the closed-form steady state") {
  const SpinSystemParams params = defaults();
  const FieldConfig field{500.0};
  const double p_star = steady_state_polarization(params, field).p;
  const auto series = evolve_polarization(params, field, 0.0, 100.0, 0.01);
  CHECK(series.back().state.p == Approx(p_star).margin(1e-6));
  for (const auto& sample : series) CHECK(std::abs(sample.state.p) <= 1.0);
}

TEST_CASE("ode matches the analytic exponential solution") {
  const SpinSystemParams params = defaults();
  const FieldConfig field{520.0};
  const FlipProbabilities fp = flip_probabilities(params, field);
  const double gain = (fp.p_plus - fp.p_minus) / 2.0;
  const double loss = (fp.p_plus + fp.p_minus) / 2.0 + params.k_ratio;

  const auto series = evolve_polarization(params, field, -0.4, 30.0, 0.01);
  for (std::size_t i = 0; i < series.size(); i += 50) {
    const double expected = oracles::linear_ode_solution(-0.4, gain, loss, series[i].t);
    CHECK(series[i].state.p == Approx(expected).margin(1e-10));
  }
}

TEST_CASE("ode reduces to pure exponential decay without pumping") {
  SpinSystemParams params = defaults();
  params.a_es = 0.0;   // no mixing anywhere
  params.k_ratio = 0.04;
  const auto series = evolve_polarization(params, FieldConfig{100.0}, 0.5, 50.0, 0.005);
  for (std::size_t i = 0; i < series.size(); i += 500) {
    const double expected = 0.5 * std::exp(-params.k_ratio * series[i].t);
    CHECK(series[i].state.p == Approx(expected).margin(1e-10));
  }
}

TEST_CASE("ode rejects invalid inputs") {
  const SpinSystemParams params = defaults();
  CHECK_THROWS_AS(evolve_polarization(params, FieldConfig{500.0}, 1.5, 10.0, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve_polarization(params, FieldConfig{500.0}, 0.0, 10.0, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve_polarization(params, FieldConfig{500.0}, 0.0, -1.0, 0.01),
                  std::invalid_argument);
}

TEST_CASE("ode flags an overshooting step size") {
  // dt far beyond the RK4 stability limit for this relaxation rate drives
  // |P| past 1 and must be rejected, not silently clamped.
  SpinSystemParams params = defaults();
  params.k_ratio = 0.9;
  CHECK_THROWS_AS(evolve_polarization(params, FieldConfig{517.0}, -1.0, 40.0, 8.0),
                  std::runtime_error);
}

TEST_CASE("effective temperature frozen values") {
  // frozen from an independent arbitrary-precision evaluation
  CHECK(effective_temperature(0.98, 200.0) == Approx(2.0888434817323220e-6).epsilon(1e-12));
  CHECK(effective_temperature(std::tanh(1.0), 200.0) ==
        Approx(4.7992430733662212e-6).epsilon(1e-12));
  // sign of the polarization is irrelevant
  CHECK(effective_temperature(-0.98, 200.0) == effective_temperature(0.98, 200.0));
}

TEST_CASE("effective temperature limits and errors") {
  CHECK(std::isinf(effective_temperature(0.0, 200.0)));
  CHECK(effective_temperature(1e-12, 200.0) > 1.0);  // approaches infinity
  CHECK_THROWS_AS(effective_temperature(1.0, 200.0), std::domain_error);
  CHECK_THROWS_AS(effective_temperature(-1.2, 200.0), std::domain_error);
  CHECK_THROWS_AS(effective_temperature(0.5, 0.0), std::invalid_argument);
}
