#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwa/dmrg.hpp"
#include "qwa/hamiltonian.hpp"
#include "qwa/instance.hpp"
#include "qwa/mps.hpp"

namespace qwa {

struct AnnealParams {
  double gamma0 = 3.0;
  double gamma_min = 0.01;
  double dgamma_cap = 0.5;
  double dgamma_coeff = 0.1;
  double h_break = 1e-6;
  // Site that carries h_break. When absent a site is drawn from break_seed,
  // which itself defaults to the instance seed.
  std::optional<int> break_site;
  std::optional<std::uint64_t> break_seed;
  TruncationPolicy policy;
  DmrgOptions sweeps;
  int first_step_sweeps = 8;

  void validate() const;
};

struct TraceRecord {
  double gamma = 0.0;
  double energy = 0.0;
  double s_max = 0.0;
  int m_max = 1;
  double max_discarded = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  double work = 0.0;
};

using AnnealTrace = std::vector<TraceRecord>;

struct RunResult {
  SpinConfiguration config;  // by site
  double classical_energy = 0.0;
  AnnealTrace trace;
  std::optional<double> oracle_energy;
  std::optional<bool> success;
  bool ambiguous_readout = false;
  std::vector<double> magnetization;  // <sigma^z_i> by site at gamma_min
  int break_site = 0;
  int mpo_bond_dim = 0;
  int bandwidth = 0;
  double work = 0.0;
  int total_sweeps = 0;
  double wall_seconds = 0.0;
};

class AnnealError : public std::runtime_error {
 public:
  AnnealError(const std::string& what, AnnealTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const AnnealTrace& trace() const { return trace_; }

 private:
  AnnealTrace trace_;
};

inline constexpr double kAmbiguousReadout = 1e-3;
inline constexpr double kSuccessTolerance = 1e-9;

double next_gamma(double gamma, double s_max_prev, const AnnealParams& params);

int resolve_break_site(const Instance& instance, const AnnealParams& params);

// The instance with h_break added at the chosen site.
Instance with_break_field(const Instance& instance, const AnnealParams& params);

// Sign of <sigma^z> per site; values below 1e-12 in magnitude read as +1.
SpinConfiguration readout(const MatrixProductState& psi, const SiteOrdering& ordering);

struct AnnealState {
  MatrixProductState state;  // chain order, converged at the last traced gamma
  SiteOrdering ordering;
};

struct AnnealHooks {
  // Called after every converged gamma step.
  std::function<void(const TraceRecord&, const MatrixProductState&)> on_step;
};

// Where an interrupted anneal picks up: the state converged at trace.back().
struct ResumePoint {
  MatrixProductState state;
  AnnealTrace trace;
};

struct AnnealOutcome {
  RunResult result;
  AnnealState final;
};

AnnealOutcome anneal_with_state(const Instance& instance, const AnnealParams& params,
                                const AnnealHooks& hooks = {},
                                std::optional<ResumePoint> resume = std::nullopt);

RunResult anneal(const Instance& instance, const AnnealParams& params);

// Sets oracle_energy and success = |classical_energy - oracle| <= 1e-9.
void attach_oracle(RunResult& result, double oracle_energy);

}  // namespace qwa
