#include "qwa/lanczos.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qwa/rng.hpp"

namespace qwa {

namespace {

constexpr int kCheckEvery = 4;

void project_out(Eigen::VectorXd& v, const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) return;
  v.noalias() -= basis * (basis.transpose() * v);
}

// Solves the tridiagonal system (sub, diag, sub) x = b in place with partial
// pivoting; zero pivots are nudged, which suits inverse iteration.
void tridiagonal_solve(std::vector<double> dl, std::vector<double> d, std::vector<double> du,
                       Eigen::VectorXd& b) {
  const int n = static_cast<int>(d.size());
  std::vector<double> du2(n, 0.0);
  constexpr double kTiny = 1e-300;
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = kTiny;
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = temp;
      const double bt = b[i];
      b[i] = b[i + 1];
      b[i + 1] = bt - fact * b[i + 1];
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = kTiny;
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (int i = n - 3; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
}

// Lowest eigenpair of the Lanczos tridiagonal matrix: eigenvalues only, then
// inverse iteration for the vector.
double lowest_tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta, int k,
                          Eigen::VectorXd& vec) {
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
  Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double theta = eig.eigenvalues()(0);
  vec = Eigen::VectorXd::Ones(k);
  if (k == 1) return theta;
  std::vector<double> d(k), off(beta.begin(), beta.begin() + (k - 1));
  for (int i = 0; i < k; ++i) d[i] = alpha[i] - theta;
  for (int pass = 0; pass < 3; ++pass) {
    tridiagonal_solve(off, d, off, vec);
    vec.normalize();
  }
  if (vec(0) < 0.0) vec = -vec;
  return theta;
}

}  // namespace

LanczosResult lanczos_lowest(const LinearOperator& apply, const Eigen::VectorXd& seed,
                             const LanczosOptions& options,
                             std::span<const Eigen::VectorXd> deflate) {
  const Eigen::Index dim = seed.size();
  if (dim == 0) throw std::invalid_argument("lanczos: empty seed");
  const auto n_deflate = static_cast<Eigen::Index>(deflate.size());
  if (n_deflate >= dim) throw std::invalid_argument("lanczos: deflation leaves no room");

  Eigen::MatrixXd d(dim, n_deflate);
  for (Eigen::Index k = 0; k < n_deflate; ++k) d.col(k) = deflate[k];

  Eigen::VectorXd v = seed;
  project_out(v, d);
  project_out(v, d);
  if (!(v.norm() > 1e-12 * std::max(1.0, seed.norm()))) {
    Rng rng(0x5eedULL);
    for (Eigen::Index k = 0; k < dim; ++k) v[k] = rng.uniform(-1.0, 1.0);
    project_out(v, d);
    project_out(v, d);
  }
  v.normalize();

  LanczosResult result;
  const int kmax = static_cast<int>(
      std::min<Eigen::Index>(std::max(2, options.krylov_dim), dim - n_deflate));
  Eigen::MatrixXd basis(dim, kmax);
  Eigen::VectorXd w(dim), h;
  std::vector<double> alpha, beta;
  std::optional<double> previous_cycle;

  while (true) {
    basis.col(0) = v;
    alpha.clear();
    beta.clear();
    Eigen::VectorXd ritz;
    double theta = 0.0;
    int k = 0;
    bool done = false;

    for (int j = 0; j < kmax; ++j) {
      apply(basis.col(j), w);
      ++result.iterations;
      project_out(w, d);
      const auto prior = basis.leftCols(j + 1);
      h.noalias() = prior.transpose() * w;
      alpha.push_back(h(j));
      w.noalias() -= prior * h;
      h.noalias() = prior.transpose() * w;
      w.noalias() -= prior * h;
      project_out(w, d);
      const double bnorm = w.norm();
      k = j + 1;

      const bool last = k == kmax || result.iterations >= options.max_iterations;
      const bool exhausted = bnorm <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
      if (k % kCheckEvery == 0 || last || exhausted || k == 1) {
        theta = lowest_tridiagonal(alpha, beta, k, ritz);
        result.residual = std::abs(bnorm * ritz(k - 1));
        const double scale = std::max(1.0, std::abs(theta));
        if (result.residual <= options.tolerance * scale || exhausted) {
          result.converged = true;
          done = true;
        } else if (k == kmax && previous_cycle &&
                   std::abs(theta - *previous_cycle) <= options.stall_tolerance * scale) {
          result.converged = true;
          done = true;
        } else if (result.iterations >= options.max_iterations) {
          done = true;
        }
        if (done || k == kmax) break;
      }
      beta.push_back(bnorm);
      basis.col(k) = w / bnorm;
    }

    v.noalias() = basis.leftCols(k) * ritz;
    project_out(v, d);
    v.normalize();
    result.eigenvalue = theta;
    if (done) {
      result.vector = std::move(v);
      return result;
    }
    previous_cycle = theta;
  }
}

}  // namespace qwa
