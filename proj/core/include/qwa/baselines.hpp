#pragma once

#include <cstdint>
#include <vector>

#include "qwa/instance.hpp"
#include "qwa/rng.hpp"

namespace qwa {

inline constexpr int kBruteForceCap = 24;

struct BruteForceResult {
  double min_energy = 0.0;
  std::vector<SpinConfiguration> minimizers;  // sorted lexicographically
};

// Exhaustive scan. With all fields zero only half the space is walked and
// each minimizer is reported together with its global flip.
BruteForceResult brute_force(const Instance& instance, int cap = kBruteForceCap);

struct StaParams {
  double beta0 = 0.1;
  double beta_max = 1e6;
  double r = 1.0 + 1e-5;
  long steps_per_beta = 10000;  // one step = one attempted flip at a random site
  std::uint64_t seed = 0;

  void validate() const;
  // Number of temperature levels visited.
  long n_levels() const;

  // Shorter schedule that still finds the ground state on desk-scale
  // ladders; used with several restarts.
  static StaParams robust(std::uint64_t seed);
  // Deliberately under-annealed, for sampling local minima.
  static StaParams weak(std::uint64_t seed);
};

struct StaResult {
  double energy = 0.0;
  SpinConfiguration config;
  long flips_attempted = 0;
};

// Single-spin-flip Metropolis; beta is multiplied by r after every block of
// steps_per_beta attempts until it reaches beta_max. Returns the best
// configuration seen.
StaResult sta(const Instance& instance, const StaParams& params);

// Best of `restarts` runs with seeds params.seed, params.seed + 1, ...
StaResult sta_best_of(const Instance& instance, const StaParams& params, int restarts);

// Greedy single-flip descent: flips the most energy-lowering spin until none
// lowers the energy.
SpinConfiguration quench(const Instance& instance, SpinConfiguration config);

bool is_local_minimum(const Instance& instance, const SpinConfiguration& config);

struct LocalMinimum {
  double energy = 0.0;
  SpinConfiguration config;
  int hits = 0;
};

// `n_runs` weak anneals (seeds weak.seed + k), each quenched, deduplicated up
// to global flip when the fields vanish, sorted by energy.
std::vector<LocalMinimum> sample_local_minima(const Instance& instance, const StaParams& weak,
                                              int n_runs);

// Fixed-temperature Metropolis chain, exposed for checking detailed balance.
class MetropolisChain {
 public:
  MetropolisChain(const Instance& instance, double beta, SpinConfiguration start,
                  std::uint64_t seed);
  void step();
  void set_beta(double beta) { beta_ = beta; }
  const SpinConfiguration& config() const { return config_; }
  double energy() const { return energy_; }

 private:
  double flip_cost(int site) const;

  std::vector<std::vector<std::pair<int, double>>> adj_;
  std::vector<double> fields_;
  double beta_;
  SpinConfiguration config_;
  double energy_;
  Rng rng_;
};

}  // namespace qwa
