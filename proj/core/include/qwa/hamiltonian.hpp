#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qwa/instance.hpp"
#include "qwa/mps.hpp"

namespace qwa {

// Placement of the instance's sites on the 1D chain that DMRG sweeps over.
struct SiteOrdering {
  std::vector<int> position;  // site -> chain position
  std::vector<int> site_at;   // chain position -> site
  int bandwidth = 0;          // max |position(i) - position(j)| over edges

  int size() const { return static_cast<int>(site_at.size()); }
};

// Validates the permutation and computes its bandwidth on `instance`.
SiteOrdering make_ordering(const Instance& instance, std::vector<int> site_at);

// Chains and ladders keep their natural (rung-by-rung) order; random graphs
// get the best Cuthill-McKee / reverse Cuthill-McKee order over all start
// vertices. Throws for disconnected graphs.
SiteOrdering order_sites(const Instance& instance);

// One non-zero entry W[left][right] of a site operator tensor, as a 2x2
// matrix op(t, s) = <t|op|s> in the sigma^z basis.
struct MpoTerm {
  int left = 0;
  int right = 0;
  Eigen::Matrix2d op;
};

struct MpoSite {
  int left_dim = 1;
  int right_dim = 1;
  std::vector<MpoTerm> terms;
};

class MatrixProductOperator {
 public:
  explicit MatrixProductOperator(std::vector<MpoSite> sites);

  int size() const { return static_cast<int>(sites_.size()); }
  const MpoSite& operator[](int i) const { return sites_[i]; }
  std::vector<int> bond_dims() const;
  int max_bond_dim() const;

 private:
  std::vector<MpoSite> sites_;
};

// Exact finite-state encoding of
//   H = -sum J_ij Z_i Z_j - gamma sum X_i - sum h_i Z_i
// along `ordering`. A coupling is carried by a channel that opens at its
// left endpoint and closes at its right one, so bond dimensions stay at or
// below bandwidth + 2.
MatrixProductOperator build_mpo(const Instance& instance, const SiteOrdering& ordering,
                                double gamma);

// <psi|H|psi> / <psi|psi>.
double energy(const MatrixProductState& psi, const MatrixProductOperator& mpo);

// Re-index a site-ordered configuration to chain positions and back.
SpinConfiguration to_chain_order(const SpinConfiguration& by_site, const SiteOrdering& ordering);
SpinConfiguration to_site_order(const SpinConfiguration& by_position,
                                const SiteOrdering& ordering);

}  // namespace qwa
