#pragma once

// Block environments shared by energy evaluation and the DMRG sweeps.
// Env[a] is a (bra x ket) matrix for MPO channel a.

#include <Eigen/Dense>
#include <vector>

#include "qwa/hamiltonian.hpp"
#include "qwa/mps.hpp"

namespace qwa::detail {

using Env = std::vector<Eigen::MatrixXd>;

inline Env boundary_env(int channels, int channel) {
  Env e(channels, Eigen::MatrixXd::Zero(1, 1));
  e[channel](0, 0) = 1.0;
  return e;
}

// Absorb site tensor `a` (with operator `w`) into a left environment.
inline Env extend_left(const Env& left, const SiteTensor& a, const MpoSite& w) {
  const int r = a.right_dim();
  std::vector<std::array<Eigen::MatrixXd, kPhys>> t(left.size());
  std::vector<char> used(left.size(), 0);
  for (const auto& term : w.terms) used[term.left] = 1;
  for (std::size_t c = 0; c < left.size(); ++c)
    if (used[c])
      for (int s = 0; s < kPhys; ++s) t[c][s].noalias() = left[c] * a.block[s];

  std::vector<std::array<Eigen::MatrixXd, kPhys>> u(w.right_dim);
  std::vector<char> live(w.right_dim, 0);
  for (const auto& term : w.terms) {
    auto& dst = u[term.right];
    if (!live[term.right]) {
      for (auto& m : dst) m = Eigen::MatrixXd::Zero(a.left_dim(), r);
      live[term.right] = 1;
    }
    for (int tt = 0; tt < kPhys; ++tt)
      for (int s = 0; s < kPhys; ++s)
        if (term.op(tt, s) != 0.0) dst[tt] += term.op(tt, s) * t[term.left][s];
  }
  Env out(w.right_dim);
  for (int c = 0; c < w.right_dim; ++c) {
    out[c] = Eigen::MatrixXd::Zero(r, r);
    if (!live[c]) continue;
    for (int tt = 0; tt < kPhys; ++tt) out[c].noalias() += a.block[tt].transpose() * u[c][tt];
  }
  return out;
}

// Absorb site tensor `a` (with operator `w`) into a right environment.
inline Env extend_right(const Env& right, const SiteTensor& a, const MpoSite& w) {
  const int l = a.left_dim();
  std::vector<std::array<Eigen::MatrixXd, kPhys>> t(right.size());
  std::vector<char> used(right.size(), 0);
  for (const auto& term : w.terms) used[term.right] = 1;
  for (std::size_t c = 0; c < right.size(); ++c)
    if (used[c])
      for (int s = 0; s < kPhys; ++s) t[c][s].noalias() = right[c] * a.block[s].transpose();

  std::vector<std::array<Eigen::MatrixXd, kPhys>> u(w.left_dim);
  std::vector<char> live(w.left_dim, 0);
  for (const auto& term : w.terms) {
    auto& dst = u[term.left];
    if (!live[term.left]) {
      for (auto& m : dst) m = Eigen::MatrixXd::Zero(a.right_dim(), l);
      live[term.left] = 1;
    }
    for (int tt = 0; tt < kPhys; ++tt)
      for (int s = 0; s < kPhys; ++s)
        if (term.op(tt, s) != 0.0) dst[tt] += term.op(tt, s) * t[term.right][s];
  }
  Env out(w.left_dim);
  for (int c = 0; c < w.left_dim; ++c) {
    out[c] = Eigen::MatrixXd::Zero(l, l);
    if (!live[c]) continue;
    for (int tt = 0; tt < kPhys; ++tt) out[c].noalias() += a.block[tt] * u[c][tt];
  }
  return out;
}

// Overlap environment <a|b> (rows index a's bond, columns b's bond).
inline Eigen::MatrixXd overlap_left(const Eigen::MatrixXd& env, const SiteTensor& a,
                                    const SiteTensor& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.right_dim(), b.right_dim());
  for (int s = 0; s < kPhys; ++s) out.noalias() += a.block[s].transpose() * (env * b.block[s]);
  return out;
}

inline Eigen::MatrixXd overlap_right(const Eigen::MatrixXd& env, const SiteTensor& a,
                                     const SiteTensor& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.left_dim(), b.left_dim());
  for (int s = 0; s < kPhys; ++s) out.noalias() += a.block[s] * (env * b.block[s].transpose());
  return out;
}

}  // namespace qwa::detail
