#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace qwa {

struct LanczosOptions {
  int max_iterations = 300;  // operator applications, summed over restarts
  int krylov_dim = 100;      // restart length
  double tolerance = 1e-10;  // residual relative to max(1, |eigenvalue|)
  // Also accepted: the Ritz value moved less than this (relative) over a full
  // restart cycle. Near-degenerate pairs stall the residual long after the
  // eigenvalue has settled.
  double stall_tolerance = 1e-12;
};

struct LanczosResult {
  double eigenvalue = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

// Lowest eigenpair of a symmetric operator by restarted Lanczos with full
// reorthogonalization. `deflate` holds orthonormal vectors whose span is
// excluded from the search.
LanczosResult lanczos_lowest(const LinearOperator& apply, const Eigen::VectorXd& seed,
                             const LanczosOptions& options,
                             std::span<const Eigen::VectorXd> deflate = {});

}  // namespace qwa
