#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwa/anneal.hpp"
#include "qwa/dmrg.hpp"
#include "qwa/instance.hpp"
#include "qwa/mps.hpp"

namespace qwa {

struct ChiOptions {
  double probe_h = 1e-6;
  // All probe sites up to this size, otherwise `subsample` random ones.
  int full_probe_limit = 40;
  int subsample = 20;
  std::uint64_t subsample_seed = 1;
  int max_sweeps = 20;
  // Probe solves stop once no magnetization moves by more than this
  // fraction of probe_h between sweeps.
  double settle_fraction = 1e-3;
  LanczosOptions lanczos{400, 40, 1e-13};
};

struct ChiResult {
  double value = 0.0;
  std::vector<int> probe_sites;
  int failures = 0;
  bool partial() const { return failures > 0; }
};

// Spin-glass susceptibility (1/N) sum_ij (d<sigma^z_i>/dh_j)^2 by finite
// differences: each probe adds probe_h at site j (aligned with the local
// magnetization) on top of `fields`, starting from the converged `base`
// state. Sites and states are in chain order of `ordering`.
ChiResult chi_sg_from_state(const Instance& instance, const SiteOrdering& ordering, double gamma,
                            const MatrixProductState& base, const TruncationPolicy& policy,
                            const ChiOptions& options);

// Convenience: anneals `instance` (with h_break from `params`) down to gamma,
// then measures around that state.
ChiResult chi_sg(const Instance& instance, double gamma, const AnnealParams& params,
                 const ChiOptions& options);

struct SweepOptions {
  AnnealParams anneal;  // h_break, truncation, sweep budget, start of the pre-anneal
  // Lowest excitation with h_break present. On field-free instances, once
  // the first excited state is the global flip of the ground state (the
  // pair is split only by h_break), the gap is taken above that doublet.
  bool compute_gap = true;
  bool compute_chi = false;
  ChiOptions chi;
  std::vector<SpinConfiguration> tracked;  // by site
  int point_sweeps = 8;
  std::uint64_t excited_seed = 17;
};

struct TrackedAmplitude {
  int id = 0;
  double amplitude = 0.0;
};

struct SweepPoint {
  double gamma = 0.0;
  double energy = 0.0;
  std::optional<double> gap;
  std::optional<double> doublet_splitting;  // E1 - E0 when the gap skips the doublet
  double s_max = 0.0;
  int m_max = 1;
  std::optional<double> chi_sg;
  std::vector<int> chi_probe_sites;
  std::vector<TrackedAmplitude> tracked;
  bool failed = false;
  std::string error;
};

// Warm-started ground states along strictly decreasing `gammas`. When the
// grid starts below anneal.gamma0 the state is first annealed down to it.
// Tracked amplitudes are folded over the global flip when the instance has
// no fields of its own.
std::vector<SweepPoint> gamma_sweep(const Instance& instance, const std::vector<double>& gammas,
                                    const SweepOptions& options);

struct CriticalEstimate {
  std::optional<double> gamma_gap_min;
  std::optional<double> gamma_chi_max;
  std::optional<int> index_gap_min;
  std::optional<int> index_chi_max;
};

CriticalEstimate estimate_critical(const std::vector<SweepPoint>& points);

}  // namespace qwa
