#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qwa/lanczos.hpp"
#include "qwa/rng.hpp"

using namespace qwa;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  return a;
}

LinearOperator as_operator(const Eigen::MatrixXd& a) {
  return [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; };
}

Eigen::VectorXd ones(int n) { return Eigen::VectorXd::Ones(n); }

}  // namespace

TEST(Lanczos, MatchesDenseEigensolver) {
  for (int n : {1, 2, 5, 60, 300}) {
    const auto a = random_symmetric(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const auto r = lanczos_lowest(as_operator(a), ones(n), {});
    ASSERT_TRUE(r.converged) << n;
    EXPECT_NEAR(r.eigenvalue, eig.eigenvalues()(0), 1e-9) << n;
    EXPECT_NEAR(std::abs(r.vector.dot(eig.eigenvectors().col(0))), 1.0, 1e-7) << n;
    EXPECT_NEAR(r.vector.norm(), 1.0, 1e-12);
  }
}

TEST(Lanczos, RestartsWithSmallKrylovSpace) {
  const auto a = random_symmetric(200, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const auto r = lanczos_lowest(as_operator(a), ones(200), {2000, 12, 1e-10, 1e-14});
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.iterations, 12);
  EXPECT_NEAR(r.eigenvalue, eig.eigenvalues()(0), 1e-8);
}

TEST(Lanczos, DeflationFindsSecondLevel) {
  const auto a = random_symmetric(80, 9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const std::vector<Eigen::VectorXd> deflate{eig.eigenvectors().col(0)};
  const auto r = lanczos_lowest(as_operator(a), ones(80), {}, deflate);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.eigenvalue, eig.eigenvalues()(1), 1e-9);
  EXPECT_LT(std::abs(r.vector.dot(deflate[0])), 1e-10);
}

TEST(Lanczos, SeedInsideDeflatedSpaceFallsBack) {
  const Eigen::MatrixXd a = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0).asDiagonal();
  Eigen::VectorXd e0 = Eigen::VectorXd::Unit(6, 0);
  const std::vector<Eigen::VectorXd> deflate{e0};
  const auto r = lanczos_lowest(as_operator(a), e0, {}, deflate);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.eigenvalue, 1.0, 1e-10);
}

TEST(Lanczos, ExactInvariantSubspace) {
  const Eigen::MatrixXd a = Eigen::VectorXd::LinSpaced(10, -3.0, 6.0).asDiagonal();
  // The seed touches only two eigenvectors; the Krylov space closes at k = 2.
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(10);
  seed(0) = 1.0;
  seed(4) = 1.0;
  const auto r = lanczos_lowest(as_operator(a), seed, {});
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_NEAR(r.eigenvalue, -3.0, 1e-12);
}

TEST(Lanczos, ReportsNonConvergence) {
  const auto a = random_symmetric(400, 5);
  const auto r = lanczos_lowest(as_operator(a), ones(400), {6, 6, 1e-14, 0.0});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 6);
  EXPECT_GT(r.residual, 0.0);
}

TEST(Lanczos, RejectsDegenerateInput) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(lanczos_lowest(as_operator(a), Eigen::VectorXd(), {}), std::invalid_argument);
  const std::vector<Eigen::VectorXd> deflate{Eigen::VectorXd::Unit(2, 0),
                                             Eigen::VectorXd::Unit(2, 1)};
  EXPECT_THROW(lanczos_lowest(as_operator(a), ones(2), {}, deflate), std::invalid_argument);
}
