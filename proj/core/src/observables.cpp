#include "qwa/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "qwa/hamiltonian.hpp"
#include "qwa/rng.hpp"

namespace qwa {

namespace {

constexpr double kPartnerOverlap = 0.5;
constexpr int kMaxValleySwaps = 4;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Repeats single sweeps until the magnetization settles (at least two).
MatrixProductState settle(const MatrixProductOperator& mpo, MatrixProductState psi,
                          const TruncationPolicy& policy, const ChiOptions& options,
                          std::vector<double>& m) {
  DmrgOptions opts;
  opts.max_sweeps = 1;
  opts.lanczos = options.lanczos;
  m = expect_sz_all(psi);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    psi = ground_state(mpo, std::move(psi), policy, opts).state;
    auto next = expect_sz_all(psi);
    const double moved = max_abs_diff(next, m);
    m = std::move(next);
    if (sweep >= 1 && moved < options.settle_fraction * options.probe_h) break;
  }
  return psi;
}

std::vector<int> probe_sites(int n, const ChiOptions& options) {
  std::vector<int> sites(n);
  std::iota(sites.begin(), sites.end(), 0);
  if (n <= options.full_probe_limit || options.subsample >= n) return sites;
  Rng rng(options.subsample_seed);
  for (int k = 0; k < options.subsample; ++k) {
    const int pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(sites[k], sites[pick]);
  }
  sites.resize(options.subsample);
  std::sort(sites.begin(), sites.end());
  return sites;
}

// Ground state of `working` at gamma: annealed from params.gamma0 when gamma
// lies below it, otherwise converged directly from |X>.
MatrixProductState converge_at(const Instance& working, const SiteOrdering& ordering, double gamma,
                               const AnnealParams& params) {
  if (gamma < params.gamma0) {
    AnnealParams p = params;
    p.gamma_min = gamma;
    MatrixProductState psi = product_state_x(working.n_sites());
    bool first = true;
    double g = params.gamma0;
    double s_prev = 0.0;
    while (true) {
      const auto mpo = build_mpo(working, ordering, g);
      DmrgOptions opts = params.sweeps;
      if (first) opts.max_sweeps = params.first_step_sweeps;
      auto out = ground_state(mpo, std::move(psi), params.policy, opts);
      psi = std::move(out.state);
      s_prev = out.report.s_max;
      first = false;
      if (g <= gamma) break;
      g = next_gamma(g, s_prev, p);
    }
    return psi;
  }
  DmrgOptions opts = params.sweeps;
  opts.max_sweeps = params.first_step_sweeps;
  return ground_state(build_mpo(working, ordering, gamma), product_state_x(working.n_sites()),
                      params.policy, opts)
      .state;
}

}  // namespace

ChiResult chi_sg_from_state(const Instance& instance, const SiteOrdering& ordering, double gamma,
                            const MatrixProductState& base, const TruncationPolicy& policy,
                            const ChiOptions& options) {
  if (!(options.probe_h > 0.0)) throw std::invalid_argument("probe field must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("chi_sg needs gamma > 0");
  const int n = instance.n_sites();
  std::vector<double> m0;
  const auto base_state = settle(build_mpo(instance, ordering, gamma), base, policy, options, m0);

  ChiResult out;
  out.probe_sites = probe_sites(n, options);
  double sum = 0.0;
  int used = 0;
  for (int j : out.probe_sites) {
    const int p = ordering.position[j];
    const double sign = m0[p] < 0.0 ? -1.0 : 1.0;
    const Instance probed = instance.with_field(j, instance.fields()[j] + sign * options.probe_h);
    try {
      std::vector<double> m;
      settle(build_mpo(probed, ordering, gamma), base_state, policy, options, m);
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = (m[i] - m0[i]) / options.probe_h;
        s += r * r;
      }
      sum += s;
      ++used;
    } catch (const SolverError&) {
      ++out.failures;
    }
  }
  out.value = used > 0 ? sum / used : 0.0;
  return out;
}

ChiResult chi_sg(const Instance& instance, double gamma, const AnnealParams& params,
                 const ChiOptions& options) {
  params.validate();
  const Instance working = with_break_field(instance, params);
  const SiteOrdering ordering = order_sites(working);
  const auto base = converge_at(working, ordering, gamma, params);
  return chi_sg_from_state(working, ordering, gamma, base, params.policy, options);
}

std::vector<SweepPoint> gamma_sweep(const Instance& instance, const std::vector<double>& gammas,
                                    const SweepOptions& options) {
  if (gammas.empty()) return {};
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] >= 0.0)) throw std::invalid_argument("gamma grid must be non-negative");
    if (k > 0 && !(gammas[k] < gammas[k - 1]))
      throw std::invalid_argument("gamma grid must be strictly decreasing");
  }
  const AnnealParams& params = options.anneal;
  params.validate();
  const Instance working = with_break_field(instance, params);
  const SiteOrdering ordering = order_sites(working);
  const int n = instance.n_sites();
  const bool fold = !instance.has_fields();

  std::vector<SpinConfiguration> tracked_chain;
  for (const auto& c : options.tracked) {
    if (static_cast<int>(c.size()) != n)
      throw std::invalid_argument("tracked configuration has the wrong length");
    tracked_chain.push_back(to_chain_order(c, ordering));
  }

  MatrixProductState psi = converge_at(working, ordering, gammas[0], params);
  std::optional<MatrixProductState> excited, second;
  Rng rng(options.excited_seed);

  std::vector<SweepPoint> points;
  for (double g : gammas) {
    SweepPoint pt;
    pt.gamma = g;
    try {
      const auto mpo = build_mpo(working, ordering, g);
      DmrgOptions opts = params.sweeps;
      opts.max_sweeps = options.point_sweeps;
      auto gs = ground_state(mpo, psi, params.policy, opts);
      psi = std::move(gs.state);
      pt.energy = gs.report.energy;
      pt.s_max = gs.report.s_max;
      pt.m_max = gs.report.m_max;

      if (options.compute_gap) {
        auto solve = [&](std::optional<MatrixProductState>& warm,
                         std::span<const MatrixProductState> exclude) {
          DmrgOptions xopts = opts;
          if (!warm) xopts.max_sweeps = 2 * options.point_sweeps;
          auto ex = first_excited(mpo, exclude, warm ? *warm : random_mps(n, 4, rng),
                                  params.policy, xopts);
          warm = ex.state;
          return ex;
        };
        // An excited solve that lands below the current ground state means the
        // followed state sits in a higher valley; adopt the lower one and redo.
        auto adopt = [&](DmrgResult& lower) {
          second = psi;
          psi = std::move(lower.state);
          excited = fold ? global_flip(psi) : *second;
          pt.energy = lower.report.energy;
          pt.s_max = lower.report.s_max;
          pt.m_max = lower.report.m_max;
        };
        for (int attempt = 0; attempt <= kMaxValleySwaps; ++attempt) {
          pt.doublet_splitting.reset();
          const MatrixProductState ground[] = {psi};
          auto ex = solve(excited, ground);
          if (*ex.report.gap < 0.0 && attempt < kMaxValleySwaps) {
            adopt(ex);
            continue;
          }
          pt.gap = ex.report.gap;
          if (fold && std::abs(overlap(*excited, global_flip(psi))) > kPartnerOverlap) {
            const MatrixProductState doublet[] = {psi, *excited};
            auto above = solve(second, doublet);
            if (*above.report.gap < 0.0 && attempt < kMaxValleySwaps) {
              adopt(above);
              continue;
            }
            pt.doublet_splitting = pt.gap;
            pt.gap = above.report.gap;
          }
          break;
        }
      }
      if (options.compute_chi && g > 0.0) {
        auto chi = chi_sg_from_state(working, ordering, g, psi, params.policy, options.chi);
        pt.chi_sg = chi.value;
        pt.chi_probe_sites = chi.probe_sites;
        if (chi.partial()) {
          pt.failed = true;
          pt.error = std::to_string(chi.failures) + " susceptibility probes failed";
        }
      }
      for (std::size_t k = 0; k < tracked_chain.size(); ++k) {
        double a = amplitude(psi, tracked_chain[k]);
        if (fold) {
          const double b = amplitude(psi, flipped(tracked_chain[k]));
          if (std::abs(b) > std::abs(a)) a = b;
        }
        pt.tracked.push_back({static_cast<int>(k), a});
      }
    } catch (const std::exception& e) {
      pt.failed = true;
      pt.error = e.what();
    }
    points.push_back(std::move(pt));
  }
  return points;
}

CriticalEstimate estimate_critical(const std::vector<SweepPoint>& points) {
  CriticalEstimate est;
  for (int k = 0; k < static_cast<int>(points.size()); ++k) {
    const auto& p = points[k];
    if (p.gap && (!est.index_gap_min || *p.gap < *points[*est.index_gap_min].gap))
      est.index_gap_min = k;
    if (p.chi_sg && (!est.index_chi_max || *p.chi_sg > *points[*est.index_chi_max].chi_sg))
      est.index_chi_max = k;
  }
  if (est.index_gap_min) est.gamma_gap_min = points[*est.index_gap_min].gamma;
  if (est.index_chi_max) est.gamma_chi_max = points[*est.index_chi_max].gamma;
  return est;
}

}  // namespace qwa
