#include "qwa/anneal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "qwa/rng.hpp"

namespace qwa {

void AnnealParams::validate() const {
  if (!(gamma_min > 0.0) || !(gamma0 > gamma_min) || !std::isfinite(gamma0))
    throw std::invalid_argument("need gamma0 > gamma_min > 0");
  if (!(dgamma_cap > 0.0) || !(dgamma_coeff > 0.0))
    throw std::invalid_argument("dgamma cap and coefficient must be positive");
  // A negative h_break is allowed; it selects the other branch.
  if (!(h_break != 0.0) || !std::isfinite(h_break))
    throw std::invalid_argument("h_break must be non-zero");
  if (first_step_sweeps < 1) throw std::invalid_argument("first_step_sweeps must be >= 1");
  policy.validate();
}

double next_gamma(double gamma, double s_max_prev, const AnnealParams& params) {
  double step = params.dgamma_cap;
  if (s_max_prev > 0.0) step = std::min(step, params.dgamma_coeff / s_max_prev);
  return std::max(gamma - step, params.gamma_min);
}

int resolve_break_site(const Instance& instance, const AnnealParams& params) {
  const int n = instance.n_sites();
  if (params.break_site) {
    if (*params.break_site < 0 || *params.break_site >= n)
      throw std::invalid_argument("break site out of range");
    return *params.break_site;
  }
  Rng rng(params.break_seed.value_or(instance.seed()));
  return static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
}

Instance with_break_field(const Instance& instance, const AnnealParams& params) {
  const int site = resolve_break_site(instance, params);
  return instance.with_field(site, instance.fields()[site] + params.h_break);
}

SpinConfiguration readout(const MatrixProductState& psi, const SiteOrdering& ordering) {
  const auto m = expect_sz_all(psi);
  SpinConfiguration by_position(m.size());
  for (std::size_t p = 0; p < m.size(); ++p) by_position[p] = m[p] < -1e-12 ? -1 : +1;
  return to_site_order(by_position, ordering);
}

namespace {

TraceRecord record_of(double gamma, const SweepReport& rep) {
  return {gamma,       rep.energy,         rep.s_max,     rep.m_max, rep.max_discarded,
          rep.n_sweeps_used, rep.converged, rep.work};
}

}  // namespace

AnnealOutcome anneal_with_state(const Instance& instance, const AnnealParams& params,
                                const AnnealHooks& hooks, std::optional<ResumePoint> resume) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = instance.n_sites();
  RunResult result;
  result.break_site = resolve_break_site(instance, params);
  const Instance working =
      instance.with_field(result.break_site, instance.fields()[result.break_site] + params.h_break);
  SiteOrdering ordering = order_sites(working);
  result.bandwidth = ordering.bandwidth;

  MatrixProductState psi;
  double gamma = params.gamma0;
  if (resume) {
    if (resume->trace.empty()) throw std::invalid_argument("resume point has no trace");
    if (resume->state.size() != n) throw std::invalid_argument("resume state has the wrong size");
    psi = std::move(resume->state);
    result.trace = std::move(resume->trace);
    gamma = result.trace.back().gamma;
    for (const auto& r : result.trace) {
      result.work += r.work;
      result.total_sweeps += r.sweeps_used;
    }
  } else {
    psi = product_state_x(n);
  }

  auto step = [&](double g, int max_sweeps) {
    const auto mpo = build_mpo(working, ordering, g);
    result.mpo_bond_dim = std::max(result.mpo_bond_dim, mpo.max_bond_dim());
    DmrgOptions opts = params.sweeps;
    opts.max_sweeps = max_sweeps;
    DmrgResult out;
    try {
      out = ground_state(mpo, std::move(psi), params.policy, opts);
    } catch (const SolverError& e) {
      throw AnnealError("anneal aborted at gamma " + format_exact(g) + ": " + e.what(),
                        result.trace);
    }
    psi = std::move(out.state);
    const TraceRecord rec = record_of(g, out.report);
    result.trace.push_back(rec);
    result.work += rec.work;
    result.total_sweeps += rec.sweeps_used;
    if (hooks.on_step) hooks.on_step(rec, psi);
  };

  if (!resume) step(gamma, params.first_step_sweeps);
  while (gamma > params.gamma_min) {
    gamma = next_gamma(gamma, result.trace.back().s_max, params);
    step(gamma, params.sweeps.max_sweeps);
  }

  const auto m = expect_sz_all(psi);
  result.magnetization.assign(n, 0.0);
  for (int p = 0; p < n; ++p) {
    result.magnetization[ordering.site_at[p]] = m[p];
    if (std::abs(m[p]) < kAmbiguousReadout) result.ambiguous_readout = true;
  }
  result.config = readout(psi, ordering);
  result.classical_energy = classical_energy(instance, result.config);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(result), {std::move(psi), std::move(ordering)}};
}

RunResult anneal(const Instance& instance, const AnnealParams& params) {
  return anneal_with_state(instance, params).result;
}

void attach_oracle(RunResult& result, double oracle_energy) {
  result.oracle_energy = oracle_energy;
  result.success = std::abs(result.classical_energy - oracle_energy) <= kSuccessTolerance;
}

}  // namespace qwa
