#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwa/hamiltonian.hpp"
#include "qwa/lanczos.hpp"
#include "qwa/mps.hpp"

namespace qwa {

struct DmrgOptions {
  int max_sweeps = 4;
  // Convergence when |dE| between sweeps < energy_tol_per_site * n_sites.
  double energy_tol_per_site = 1e-9;
  LanczosOptions lanczos;
};

struct SweepReport {
  double energy = 0.0;
  double s_max = 0.0;
  int m_max = 1;
  double max_discarded = 0.0;
  int n_sweeps_used = 0;
  bool converged = false;
  std::vector<double> sweep_energies;  // one per completed sweep
  // Work proxy: sum over eigensolver calls of m_left * m_right * iterations.
  double work = 0.0;
  long eigensolver_calls = 0;
  // Set by first_excited only.
  std::optional<double> gap;
  bool degenerate = false;
};

struct DmrgResult {
  MatrixProductState state;
  SweepReport report;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int sweep, int bond)
      : std::runtime_error(what + " (sweep " + std::to_string(sweep) + ", bond " +
                           std::to_string(bond) + ")"),
        sweep_(sweep),
        bond_(bond) {}
  int sweep() const { return sweep_; }
  int bond() const { return bond_; }

 private:
  int sweep_;
  int bond_;
};

// Two-site finite DMRG starting from `seed`. Each local problem is solved by
// Lanczos seeded with the current two-site tensor.
DmrgResult ground_state(const MatrixProductOperator& mpo, MatrixProductState seed,
                        const TruncationPolicy& policy, const DmrgOptions& options);

// Lowest state orthogonal to every state in `exclude` (exclude[0] is taken
// as the ground state for the reported gap).
DmrgResult first_excited(const MatrixProductOperator& mpo,
                         std::span<const MatrixProductState> exclude, MatrixProductState seed,
                         const TruncationPolicy& policy, const DmrgOptions& options);

}  // namespace qwa
