#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nvlac/pumping.hpp"
#include "nvlac/spin_system.hpp"

// Stochastic two-state ensemble check of the rate model. One Monte Carlo
// cycle advances the ensemble by one unit of Gamma*t: per cycle a spin in
// |up> flips with probability (p+ + k_ratio)/2 and a spin in |down> with
// probability (p- + k_ratio)/2. The k_ratio/2 part is the symmetric
// equilibration telegraph (flip rate f gives dP/dt = -2 f P, so f = k/2
// reproduces -k_eq0 P); the p/2 part is the pumping flux of the rate
// equations, whose polarization rate is (1 -+ P) p+- / 2. With the two flip
// channels combined into a single draw the chain's stationary mean equals
// the closed-form steady state exactly.
//
// Determinism: the ensemble is split into fixed blocks of `block_size`
// spins; block j draws from its own generator seeded with
// splitmix64(seed, j). Results are therefore independent of how blocks are
// scheduled, and bit-identical for a given seed.

namespace nvlac {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-block generator: xorshift-multiply stream, seeded via splitmix64.
// Cheap enough for ~1e8 draws per sweep point.
class SubStream {
 public:
  SubStream(std::uint64_t seed, std::uint64_t block) : state_(splitmix64(seed ^ splitmix64(block))) {
    if (state_ == 0) state_ = 0x2545f4914f6cdd1dULL;
  }

  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t probability_threshold(double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return ~0ULL;
  return static_cast<std::uint64_t>(p * 18446744073709551616.0);
}

}  // namespace detail

struct MonteCarloResult {
  PolarizationState state;     // ensemble mean after the last cycle
  double std_error = 0.0;      // standard error of the mean polarization
  double initial_p = 0.0;      // ensemble mean right after initialization
  std::uint64_t n_spins = 0;
  std::uint64_t n_cycles = 0;
};

struct MonteCarloTracePoint {
  std::uint64_t cycle = 0;
  double p_mean = 0.0;
  double std_error = 0.0;
};

namespace detail {

constexpr std::uint64_t mc_block_size = 4096;

template <typename PerCycle>
MonteCarloResult run_ensemble(const SpinSystemParams& params, const FieldConfig& field,
                              std::uint64_t n_spins, std::uint64_t n_cycles, std::uint64_t seed,
                              double p0, PerCycle&& per_cycle) {
  if (n_spins < 1) throw std::invalid_argument("monte_carlo_polarization: n_spins must be >= 1");
  if (n_cycles < 1) throw std::invalid_argument("monte_carlo_polarization: n_cycles must be >= 1");
  if (!(std::abs(p0) <= 1.0)) throw std::invalid_argument("monte_carlo_polarization: |p0| <= 1");

  const FlipProbabilities fp = flip_probabilities(params, field);
  const std::uint64_t thr_up = probability_threshold((fp.p_plus + params.k_ratio) / 2.0);
  const std::uint64_t thr_down = probability_threshold((fp.p_minus + params.k_ratio) / 2.0);
  const std::uint64_t thr_init_down = probability_threshold((1.0 + p0) / 2.0);

  const std::uint64_t n_blocks = (n_spins + mc_block_size - 1) / mc_block_size;
  std::vector<std::uint64_t> down_after_init(n_blocks, 0);
  // down_count[c][j]: spins in |down> in block j after cycle c.
  std::vector<std::vector<std::uint64_t>> down_count(n_cycles,
                                                     std::vector<std::uint64_t>(n_blocks, 0));

  // Blocks are independent; this loop may be parallelized without changing
  // any output as long as the reduction below keeps block order.
  for (std::uint64_t j = 0; j < n_blocks; ++j) {
    SubStream rng(seed, j);
    const std::uint64_t begin = j * mc_block_size;
    const std::uint64_t count = std::min<std::uint64_t>(mc_block_size, n_spins - begin);

    std::vector<std::uint8_t> down(count);
    std::uint64_t n_down = 0;
    for (std::uint64_t s = 0; s < count; ++s) {
      down[s] = rng.next() < thr_init_down ? 1 : 0;
      n_down += down[s];
    }
    down_after_init[j] = n_down;

    for (std::uint64_t c = 0; c < n_cycles; ++c) {
      for (std::uint64_t s = 0; s < count; ++s) {
        const std::uint64_t u = rng.next();
        if (down[s]) {
          if (u < thr_down) {
            down[s] = 0;
            --n_down;
          }
        } else if (u < thr_up) {
          down[s] = 1;
          ++n_down;
        }
      }
      down_count[c][j] = n_down;
    }
  }

  const auto mean_of = [n_spins](const std::vector<std::uint64_t>& per_block) {
    std::uint64_t total = 0;
    for (const std::uint64_t d : per_block) total += d;
    return 2.0 * static_cast<double>(total) / static_cast<double>(n_spins) - 1.0;
  };
  const auto std_error_of = [n_spins](double mean) {
    if (n_spins < 2) return 0.0;
    const double var = (1.0 - mean * mean) * static_cast<double>(n_spins) /
                       static_cast<double>(n_spins - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n_spins));
  };

  for (std::uint64_t c = 0; c < n_cycles; ++c) {
    const double mean = mean_of(down_count[c]);
    per_cycle(c + 1, mean, std_error_of(mean));
  }

  MonteCarloResult result;
  result.initial_p = mean_of(down_after_init);
  const double final_mean = mean_of(down_count[n_cycles - 1]);
  result.state = PolarizationState::from_polarization(final_mean);
  result.std_error = std_error_of(final_mean);
  result.n_spins = n_spins;
  result.n_cycles = n_cycles;
  return result;
}

}  // namespace detail

inline MonteCarloResult monte_carlo_polarization(const SpinSystemParams& params,
                                                 const FieldConfig& field, std::uint64_t n_spins,
                                                 std::uint64_t n_cycles, std::uint64_t seed,
                                                 double p0 = 0.0) {
  return detail::run_ensemble(params, field, n_spins, n_cycles, seed, p0,
                              [](std::uint64_t, double, double) {});
}

// Same ensemble, but records the per-cycle mean every `stride` cycles (the
// final cycle is always included).
inline std::pair<MonteCarloResult, std::vector<MonteCarloTracePoint>> monte_carlo_trace(
    const SpinSystemParams& params, const FieldConfig& field, std::uint64_t n_spins,
    std::uint64_t n_cycles, std::uint64_t seed, double p0 = 0.0, std::uint64_t stride = 1) {
  if (stride < 1) throw std::invalid_argument("monte_carlo_trace: stride must be >= 1");
  std::vector<MonteCarloTracePoint> trace;
  const MonteCarloResult result = detail::run_ensemble(
      params, field, n_spins, n_cycles, seed, p0,
      [&](std::uint64_t cycle, double mean, double se) {
        if (cycle % stride == 0 || cycle == n_cycles) trace.push_back({cycle, mean, se});
      });
  return {result, trace};
}

}  // namespace nvlac
