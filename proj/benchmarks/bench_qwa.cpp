#include <benchmark/benchmark.h>

#include "qwa/anneal.hpp"
#include "qwa/baselines.hpp"
#include "qwa/dmrg.hpp"
#include "qwa/lanczos.hpp"

using namespace qwa;

static void BM_TwoSiteSweep(benchmark::State& state) {
  const auto inst = generate(Ladder{static_cast<int>(state.range(0)), 2}, 1);
  const auto ord = order_sites(inst);
  const auto mpo = build_mpo(inst, ord, 0.8);
  DmrgOptions opts;
  opts.max_sweeps = 6;
  const auto warm = ground_state(mpo, product_state_x(inst.n_sites()), {}, opts).state;
  opts.max_sweeps = 1;
  for (auto _ : state) {
    auto r = ground_state(mpo, warm, {}, opts);
    benchmark::DoNotOptimize(r.report.energy);
  }
  state.counters["m_max"] = warm.max_bond_dim();
}
BENCHMARK(BM_TwoSiteSweep)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_LanczosDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  const LinearOperator op = [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; };
  const Eigen::VectorXd seed = Eigen::VectorXd::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(lanczos_lowest(op, seed, {}).eigenvalue);
}
BENCHMARK(BM_LanczosDense)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_Truncation(benchmark::State& state) {
  Rng rng(5);
  Eigen::MatrixXd m(state.range(0), state.range(0));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(truncated_svd(m, {}).choice.kept);
}
BENCHMARK(BM_Truncation)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_AnnealChain(benchmark::State& state) {
  const auto inst = generate(Chain{static_cast<int>(state.range(0))}, 2);
  double work = 0.0;
  for (auto _ : state) {
    auto r = anneal(inst, {});
    work = r.work;
    benchmark::DoNotOptimize(r.classical_energy);
  }
  state.counters["work"] = work;
}
BENCHMARK(BM_AnnealChain)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

static void BM_MetropolisStep(benchmark::State& state) {
  const auto inst = generate(Ladder{40, 2}, 4);
  MetropolisChain chain(inst, 1.0, SpinConfiguration(inst.n_sites(), 1), 9);
  for (auto _ : state) chain.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MetropolisStep);

static void BM_BruteForce(benchmark::State& state) {
  const auto inst = generate(Chain{static_cast<int>(state.range(0))}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force(inst).min_energy);
}
BENCHMARK(BM_BruteForce)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
