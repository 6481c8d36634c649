#include <gtest/gtest.h>

#include <cmath>

#include "dense.hpp"
#include "qwa/dmrg.hpp"

using namespace qwa;

namespace {

struct Solved {
  DmrgResult result;
  SiteOrdering ordering;
  MatrixProductOperator mpo;
};

Solved solve(const Instance& inst, double gamma, int sweeps = 12, TruncationPolicy policy = {}) {
  auto ord = order_sites(inst);
  auto mpo = build_mpo(inst, ord, gamma);
  DmrgOptions opts;
  opts.max_sweeps = sweeps;
  auto r = ground_state(mpo, product_state_x(inst.n_sites()), policy, opts);
  return {std::move(r), std::move(ord), std::move(mpo)};
}

Instance uncoupled_chain(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0.0});
  return Instance(Chain{n}, 0, edges, std::vector<double>(n, 0.0));
}

}  // namespace

TEST(Dmrg, FreeSpinsConvergeImmediately) {
  auto s = solve(uncoupled_chain(8), 1.0);
  EXPECT_NEAR(s.result.report.energy, -8.0, 1e-10);
  EXPECT_TRUE(s.result.report.converged);
  EXPECT_LE(s.result.report.n_sweeps_used, 2);
  EXPECT_LE(s.result.report.m_max, 2);
  EXPECT_NEAR(s.result.report.s_max, 0.0, 1e-10);
}

TEST(Dmrg, MatchesExactDiagonalization) {
  const TruncationPolicy fine{1e-12, 1024, 2, true};
  for (double gamma : {2.0, 0.7, 0.01}) {
    auto inst = generate(Ladder{6, 2}, 31);
    // The default cut is tight enough in the nearly classical regime.
    auto s = gamma < 0.1 ? solve(inst, gamma) : solve(inst, gamma, 12, fine);
    const auto exact = qwa::testing::lowest_levels(inst, gamma);
    EXPECT_NEAR(s.result.report.energy, exact.e0, 1e-7) << gamma;
    EXPECT_NEAR(energy(s.result.state, s.mpo), s.result.report.energy, 1e-9);
  }
}

TEST(Dmrg, StateMatchesExactGroundState) {
  auto inst = generate(Chain{10}, 4).with_field(3, 0.05);
  auto s = solve(inst, 0.6);
  const auto exact = qwa::testing::lowest_levels(inst, 0.6);
  const auto v = qwa::testing::to_dense(s.result.state, s.ordering);
  EXPECT_NEAR(std::abs(v.dot(exact.ground)), 1.0, 1e-7);
}

TEST(Dmrg, RandomRegularGraph) {
  auto inst = generate(RandomRegular{12, 3}, 3);
  auto s = solve(inst, 1.0, 16, TruncationPolicy{1e-12, 1024, 2, true});
  EXPECT_NEAR(s.result.report.energy, qwa::testing::lowest_levels(inst, 1.0).e0, 1e-7);
}

TEST(Dmrg, SweepEnergiesDoNotRise) {
  auto inst = generate(Ladder{8, 2}, 2);
  auto s = solve(inst, 0.8, 6, TruncationPolicy{1e-12, 1024, 2, true});
  const auto& e = s.result.report.sweep_energies;
  ASSERT_FALSE(e.empty());
  for (std::size_t k = 1; k < e.size(); ++k) EXPECT_LE(e[k], e[k - 1] + 1e-9);
  EXPECT_GT(s.result.report.work, 0.0);
  EXPECT_GT(s.result.report.eigensolver_calls, 0);
}

TEST(Dmrg, SingleSite) {
  Instance one(Chain{1}, 0, {}, {0.0});
  auto s = solve(one, 0.7);
  EXPECT_NEAR(s.result.report.energy, -0.7, 1e-12);
  const MatrixProductState exclude[] = {s.result.state};
  auto ex = first_excited(s.mpo, exclude, product_state({1}), {}, {});
  EXPECT_NEAR(ex.report.energy, 0.7, 1e-10);
  ASSERT_TRUE(ex.report.gap);
  EXPECT_NEAR(*ex.report.gap, 1.4, 1e-10);
}

TEST(Dmrg, FirstExcitedMatchesExactGap) {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    auto inst = generate(Ladder{5, 2}, seed).with_field(0, 1e-3);
    auto s = solve(inst, 1.0);
    const auto exact = qwa::testing::lowest_levels(inst, 1.0);
    Rng rng(seed);
    const MatrixProductState exclude[] = {s.result.state};
    DmrgOptions opts;
    opts.max_sweeps = 20;
    auto ex = first_excited(s.mpo, exclude, random_mps(10, 4, rng), {}, opts);
    ASSERT_TRUE(ex.report.gap);
    EXPECT_NEAR(*ex.report.gap, exact.e1 - exact.e0, 1e-6) << seed;
    EXPECT_LE(std::abs(overlap(ex.state, s.result.state)), 1e-6);
  }
}

TEST(Dmrg, DegenerateLevelsFlagged) {
  // Ferromagnetic chain with no field: tunnelling splits the pair only at
  // order gamma^8.
  std::vector<Edge> edges;
  for (int i = 0; i < 7; ++i) edges.push_back({i, i + 1, 1.0});
  Instance ferro(Chain{8}, 0, edges, std::vector<double>(8, 0.0));
  auto s = solve(ferro, 0.05);
  Rng rng(1);
  const MatrixProductState exclude[] = {s.result.state};
  DmrgOptions opts;
  opts.max_sweeps = 20;
  auto ex = first_excited(s.mpo, exclude, random_mps(8, 4, rng), {}, opts);
  EXPECT_TRUE(ex.report.degenerate);
  EXPECT_LT(*ex.report.gap, 1e-9);
}

TEST(Dmrg, TruncationRespected) {
  auto inst = generate(Ladder{6, 2}, 9);
  TruncationPolicy tight{1e-3, 3, 1, true};
  auto s = solve(inst, 0.9, 6, tight);
  EXPECT_LE(s.result.report.m_max, 4);  // a multiplet may add one
  EXPECT_GE(s.result.report.energy, qwa::testing::lowest_levels(inst, 0.9).e0 - 1e-9);
}

TEST(Dmrg, RejectsMismatchedSeed) {
  auto inst = generate(Chain{4}, 1);
  auto mpo = build_mpo(inst, order_sites(inst), 1.0);
  EXPECT_THROW(ground_state(mpo, product_state_x(5), {}, {}), std::invalid_argument);
}
