#include "qwa/dmrg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "environment.hpp"

namespace qwa {

namespace {

using detail::Env;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Block = Eigen::Map<MatrixXd>;
using ConstBlock = Eigen::Map<const MatrixXd>;

constexpr int kPairs = kPhys * kPhys;

class Engine {
 public:
  Engine(const MatrixProductOperator& mpo, MatrixProductState psi, const TruncationPolicy& policy,
         const DmrgOptions& options, std::span<const MatrixProductState> exclude)
      : mpo_(mpo), psi_(std::move(psi)), policy_(policy), options_(options), exclude_(exclude) {
    policy_.validate();
    if (options_.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (!(options_.energy_tol_per_site > 0.0))
      throw std::invalid_argument("energy tolerance must be positive");
    if (psi_.size() != mpo_.size())
      throw std::invalid_argument("seed MPS and MPO sizes differ");
    for (const auto& phi : exclude_)
      if (phi.size() != psi_.size()) throw std::invalid_argument("excluded state has wrong size");
  }

  DmrgResult run() {
    const int n = psi_.size();
    move_center(psi_, 0);
    SweepReport rep;
    if (n == 1) {
      solve_single_site(rep);
    } else {
      sweep_all(rep);
    }
    rep.m_max = psi_.max_bond_dim();
    rep.s_max = max_bond_entropy(psi_);
    return {std::move(psi_), std::move(rep)};
  }

 private:
  void sweep_all(SweepReport& rep) {
    const int n = psi_.size();
    left_.assign(n + 1, Env{});
    right_.assign(n + 1, Env{});
    left_[0] = detail::boundary_env(1, 0);
    right_[n] = detail::boundary_env(1, 0);
    for (int b = n - 1; b >= 2; --b) right_[b] = detail::extend_right(right_[b + 1], psi_[b], mpo_[b]);

    lo_.assign(exclude_.size(), std::vector<MatrixXd>(n + 1));
    ro_.assign(exclude_.size(), std::vector<MatrixXd>(n + 1));
    for (std::size_t k = 0; k < exclude_.size(); ++k) {
      lo_[k][0] = MatrixXd::Ones(1, 1);
      ro_[k][n] = MatrixXd::Ones(1, 1);
      for (int b = n - 1; b >= 2; --b)
        ro_[k][b] = detail::overlap_right(ro_[k][b + 1], psi_[b], exclude_[k][b]);
    }

    const double tol = options_.energy_tol_per_site * n;
    double previous = energy(psi_, mpo_);
    for (int sweep = 1; sweep <= options_.max_sweeps; ++sweep) {
      sweep_discarded_ = 0.0;
      for (int p = 0; p + 1 < n; ++p) optimize_pair(p, /*left_to_right=*/p + 2 < n, sweep);
      for (int p = n - 3; p >= 0; --p) optimize_pair(p, false, sweep);
      rep.sweep_energies.push_back(last_eigenvalue_);
      rep.n_sweeps_used = sweep;
      rep.energy = last_eigenvalue_;
      rep.max_discarded = sweep_discarded_;
      if (std::abs(last_eigenvalue_ - previous) < tol) {
        rep.converged = true;
        break;
      }
      previous = last_eigenvalue_;
    }
    rep.work = work_;
    rep.eigensolver_calls = calls_;
  }

  void solve_single_site(SweepReport& rep) {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (const auto& term : mpo_[0].terms) h += term.op;
    std::vector<VectorXd> deflate;
    for (const auto& phi : exclude_) {
      VectorXd g(2);
      g << phi[0].block[0](0, 0), phi[0].block[1](0, 0);
      for (const auto& d : deflate) g -= d.dot(g) * d;
      if (g.norm() > 1e-10) deflate.push_back(g.normalized());
    }
    VectorXd seed(2);
    seed << psi_[0].block[0](0, 0), psi_[0].block[1](0, 0);
    auto op = [&](const VectorXd& in, VectorXd& out) { out = h * in; };
    auto res = lanczos_lowest(op, seed, options_.lanczos, deflate);
    if (!res.converged) throw SolverError("local eigensolver did not converge", 1, 0);
    psi_[0].block[0](0, 0) = res.vector(0);
    psi_[0].block[1](0, 0) = res.vector(1);
    rep.energy = res.eigenvalue;
    rep.sweep_energies = {res.eigenvalue};
    rep.n_sweeps_used = 1;
    rep.converged = true;
    rep.work = res.iterations;
    rep.eigensolver_calls = 1;
  }

  // H_eff * theta for the pair (p, p+1); vectors hold four l x r blocks.
  void apply_pair(int p, const VectorXd& in, VectorXd& out) {
    const Env& L = left_[p];
    const Env& R = right_[p + 2];
    const MpoSite& w1 = mpo_[p];
    const MpoSite& w2 = mpo_[p + 1];
    const Eigen::Index l = L[0].rows(), r = R[0].rows(), sz = l * r;

    x_.resize(w1.left_dim);
    x_live_.assign(w1.left_dim, 0);
    for (const auto& term : w1.terms) {
      if (x_live_[term.left]) continue;
      x_live_[term.left] = 1;
      for (int k = 0; k < kPairs; ++k)
        x_[term.left][k].noalias() = L[term.left] * ConstBlock(in.data() + k * sz, l, r);
    }

    y_.resize(w1.right_dim);
    y_live_.assign(w1.right_dim, 0);
    for (const auto& term : w1.terms) {
      auto& dst = y_[term.right];
      if (!y_live_[term.right]) {
        for (auto& m : dst) m.setZero(l, r);
        y_live_[term.right] = 1;
      }
      for (int t1 = 0; t1 < kPhys; ++t1)
        for (int s1 = 0; s1 < kPhys; ++s1) {
          const double c = term.op(t1, s1);
          if (c == 0.0) continue;
          for (int s2 = 0; s2 < kPhys; ++s2) dst[t1 * kPhys + s2] += c * x_[term.left][s1 * kPhys + s2];
        }
    }

    z_.resize(w2.right_dim);
    z_live_.assign(w2.right_dim, 0);
    for (const auto& term : w2.terms) {
      if (!y_live_[term.left]) continue;
      auto& dst = z_[term.right];
      if (!z_live_[term.right]) {
        for (auto& m : dst) m.setZero(l, r);
        z_live_[term.right] = 1;
      }
      for (int t2 = 0; t2 < kPhys; ++t2)
        for (int s2 = 0; s2 < kPhys; ++s2) {
          const double c = term.op(t2, s2);
          if (c == 0.0) continue;
          for (int t1 = 0; t1 < kPhys; ++t1) dst[t1 * kPhys + t2] += c * y_[term.left][t1 * kPhys + s2];
        }
    }

    out.setZero(kPairs * sz);
    for (int c = 0; c < w2.right_dim; ++c) {
      if (!z_live_[c]) continue;
      for (int k = 0; k < kPairs; ++k)
        Block(out.data() + k * sz, l, r).noalias() += z_[c][k] * R[c].transpose();
    }
  }

  VectorXd pair_vector(const SiteTensor& a, const SiteTensor& b) const {
    const Eigen::Index l = a.left_dim(), r = b.right_dim(), sz = l * r;
    VectorXd v(kPairs * sz);
    for (int s1 = 0; s1 < kPhys; ++s1)
      for (int s2 = 0; s2 < kPhys; ++s2)
        Block(v.data() + (s1 * kPhys + s2) * sz, l, r).noalias() = a.block[s1] * b.block[s2];
    return v;
  }

  void optimize_pair(int p, bool left_to_right, int sweep) {
    const Eigen::Index l = psi_[p].left_dim(), r = psi_[p + 1].right_dim(), sz = l * r;
    VectorXd theta = pair_vector(psi_[p], psi_[p + 1]);

    std::vector<VectorXd> deflate;
    for (std::size_t k = 0; k < exclude_.size(); ++k) {
      const auto& phi = exclude_[k];
      VectorXd g(kPairs * sz);
      const MatrixXd right_t = ro_[k][p + 2].transpose();
      for (int s1 = 0; s1 < kPhys; ++s1) {
        const MatrixXd left = lo_[k][p] * phi[p].block[s1];
        for (int s2 = 0; s2 < kPhys; ++s2)
          Block(g.data() + (s1 * kPhys + s2) * sz, l, r).noalias() =
              left * phi[p + 1].block[s2] * right_t;
      }
      for (const auto& d : deflate) g -= d.dot(g) * d;
      if (g.norm() > 1e-10) deflate.push_back(g.normalized());
    }

    auto op = [&](const VectorXd& in, VectorXd& out) { apply_pair(p, in, out); };
    auto res = lanczos_lowest(op, theta, options_.lanczos, deflate);
    ++calls_;
    work_ += static_cast<double>(l) * static_cast<double>(r) * res.iterations;
    if (!res.converged)
      throw SolverError("local eigensolver did not converge (residual " +
                            std::to_string(res.residual) + ")",
                        sweep, p + 1);
    last_eigenvalue_ = res.eigenvalue;

    MatrixXd m(kPhys * l, kPhys * r);
    for (int s1 = 0; s1 < kPhys; ++s1)
      for (int s2 = 0; s2 < kPhys; ++s2)
        m.block(s1 * l, s2 * r, l, r) = ConstBlock(res.vector.data() + (s1 * kPhys + s2) * sz, l, r);
    auto svd = truncated_svd(m, policy_);
    sweep_discarded_ = std::max(sweep_discarded_, svd.choice.discarded);

    if (left_to_right) {
      psi_[p] = SiteTensor::from_left_matrix(svd.u, static_cast<int>(l));
      psi_[p + 1] = SiteTensor::from_right_matrix(svd.s.asDiagonal() * svd.vt, static_cast<int>(r));
      psi_.set_center(p + 1);
      left_[p + 1] = detail::extend_left(left_[p], psi_[p], mpo_[p]);
      for (std::size_t k = 0; k < exclude_.size(); ++k)
        lo_[k][p + 1] = detail::overlap_left(lo_[k][p], psi_[p], exclude_[k][p]);
    } else {
      psi_[p + 1] = SiteTensor::from_right_matrix(svd.vt, static_cast<int>(r));
      psi_[p] = SiteTensor::from_left_matrix(svd.u * svd.s.asDiagonal(), static_cast<int>(l));
      psi_.set_center(p);
      right_[p + 1] = detail::extend_right(right_[p + 2], psi_[p + 1], mpo_[p + 1]);
      for (std::size_t k = 0; k < exclude_.size(); ++k)
        ro_[k][p + 1] = detail::overlap_right(ro_[k][p + 2], psi_[p + 1], exclude_[k][p + 1]);
    }
  }

  const MatrixProductOperator& mpo_;
  MatrixProductState psi_;
  TruncationPolicy policy_;
  DmrgOptions options_;
  std::span<const MatrixProductState> exclude_;

  std::vector<Env> left_, right_;
  std::vector<std::vector<MatrixXd>> lo_, ro_;
  double last_eigenvalue_ = 0.0;
  double sweep_discarded_ = 0.0;
  double work_ = 0.0;
  long calls_ = 0;

  std::vector<std::array<MatrixXd, kPairs>> x_, y_, z_;
  std::vector<char> x_live_, y_live_, z_live_;
};

}  // namespace

DmrgResult ground_state(const MatrixProductOperator& mpo, MatrixProductState seed,
                        const TruncationPolicy& policy, const DmrgOptions& options) {
  return Engine(mpo, std::move(seed), policy, options, {}).run();
}

DmrgResult first_excited(const MatrixProductOperator& mpo,
                         std::span<const MatrixProductState> exclude, MatrixProductState seed,
                         const TruncationPolicy& policy, const DmrgOptions& options) {
  if (exclude.empty()) throw std::invalid_argument("first_excited needs the ground state");
  auto out = Engine(mpo, std::move(seed), policy, options, exclude).run();
  const double e0 = energy(exclude[0], mpo);
  out.report.gap = out.report.energy - e0;
  out.report.degenerate = *out.report.gap < 1e-9;
  return out;
}

}  // namespace qwa
