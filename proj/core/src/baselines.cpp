#include "qwa/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace qwa {

namespace {

using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

// Energy change of flipping `site` in `config`.
double flip_delta(const Adjacency& adj, const std::vector<double>& h, const SpinConfiguration& s,
                  int site) {
  double local = h[site];
  for (auto [j, jij] : adj[site]) local += jij * s[j];
  return 2.0 * s[site] * local;
}

bool all_fields_zero(const Instance& instance) { return !instance.has_fields(); }

// Canonical representative under global flip: first spin +1.
SpinConfiguration canonical(const SpinConfiguration& c) {
  return !c.empty() && c[0] < 0 ? flipped(c) : c;
}

}  // namespace

BruteForceResult brute_force(const Instance& instance, int cap) {
  const int n = instance.n_sites();
  if (n > cap)
    throw std::invalid_argument("exhaustive enumeration is capped at " + std::to_string(cap) +
                                " sites, instance has " + std::to_string(n));
  const auto adj = instance.adjacency();
  const auto& h = instance.fields();
  const bool symmetric = all_fields_zero(instance);
  // With the +/- symmetry the last spin stays fixed at +1.
  const int free = symmetric ? n - 1 : n;

  SpinConfiguration s(n, +1);
  double e = classical_energy(instance, s);
  constexpr double kWindow = 1e-9;
  double best = e;
  std::vector<SpinConfiguration> candidates{s};

  const std::uint64_t total = std::uint64_t{1} << free;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int k = std::countr_zero(i);
    e += flip_delta(adj, h, s, k);
    s[k] = -s[k];
    if (e < best - kWindow) {
      best = e;
      candidates.clear();
      candidates.push_back(s);
    } else if (e <= best + kWindow) {
      best = std::min(best, e);
      candidates.push_back(s);
    }
  }

  // Re-evaluate the candidates exactly; running sums drift.
  BruteForceResult out;
  std::vector<double> exact;
  exact.reserve(candidates.size());
  for (const auto& c : candidates) exact.push_back(classical_energy(instance, c));
  out.min_energy = *std::min_element(exact.begin(), exact.end());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (exact[k] > out.min_energy + 1e-12) continue;
    out.minimizers.push_back(candidates[k]);
    if (symmetric) out.minimizers.push_back(flipped(candidates[k]));
  }
  std::sort(out.minimizers.begin(), out.minimizers.end());
  out.minimizers.erase(std::unique(out.minimizers.begin(), out.minimizers.end()),
                       out.minimizers.end());
  return out;
}

void StaParams::validate() const {
  if (!(beta0 > 0.0) || !(beta0 < beta_max) || !std::isfinite(beta_max))
    throw std::invalid_argument("need 0 < beta0 < beta_max");
  if (!(r > 1.0) || !std::isfinite(r)) throw std::invalid_argument("need r > 1");
  if (steps_per_beta < 1) throw std::invalid_argument("steps_per_beta must be >= 1");
}

long StaParams::n_levels() const {
  long levels = 0;
  for (double beta = beta0; beta < beta_max; beta *= r) ++levels;
  return levels;
}

StaParams StaParams::robust(std::uint64_t seed) {
  StaParams p;
  p.r = 1.0 + 1e-3;
  p.steps_per_beta = 2000;
  p.seed = seed;
  return p;
}

StaParams StaParams::weak(std::uint64_t seed) {
  StaParams p;
  p.r = 1.05;
  p.steps_per_beta = 20;
  p.seed = seed;
  return p;
}

MetropolisChain::MetropolisChain(const Instance& instance, double beta, SpinConfiguration start,
                                 std::uint64_t seed)
    : adj_(instance.adjacency()),
      fields_(instance.fields()),
      beta_(beta),
      config_(std::move(start)),
      energy_(classical_energy(instance, config_)),
      rng_(seed) {}

double MetropolisChain::flip_cost(int site) const { return flip_delta(adj_, fields_, config_, site); }

void MetropolisChain::step() {
  const int site = static_cast<int>(rng_.below(config_.size()));
  const double de = flip_cost(site);
  if (de <= 0.0 || rng_.uniform() < std::exp(-beta_ * de)) {
    config_[site] = -config_[site];
    energy_ += de;
  }
}

StaResult sta(const Instance& instance, const StaParams& params) {
  params.validate();
  const int n = instance.n_sites();
  Rng init(params.seed);
  SpinConfiguration start(n);
  for (auto& s : start) s = init.below(2) ? +1 : -1;

  MetropolisChain chain(instance, params.beta0, start, init.next_u64());
  StaResult out;
  out.config = chain.config();
  out.energy = chain.energy();
  for (double beta = params.beta0; beta < params.beta_max; beta *= params.r) {
    chain.set_beta(beta);
    for (long k = 0; k < params.steps_per_beta; ++k) {
      chain.step();
      if (chain.energy() < out.energy - 1e-12) {
        out.energy = chain.energy();
        out.config = chain.config();
      }
    }
    out.flips_attempted += params.steps_per_beta;
  }
  out.energy = classical_energy(instance, out.config);
  return out;
}

StaResult sta_best_of(const Instance& instance, const StaParams& params, int restarts) {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  StaResult best;
  long flips = 0;
  for (int k = 0; k < restarts; ++k) {
    StaParams p = params;
    p.seed = params.seed + static_cast<std::uint64_t>(k);
    auto r = sta(instance, p);
    flips += r.flips_attempted;
    if (k == 0 || r.energy < best.energy) best = std::move(r);
  }
  best.flips_attempted = flips;
  return best;
}

SpinConfiguration quench(const Instance& instance, SpinConfiguration config) {
  const auto adj = instance.adjacency();
  const auto& h = instance.fields();
  if (static_cast<int>(config.size()) != instance.n_sites())
    throw std::invalid_argument("configuration length does not match the instance");
  while (true) {
    int best_site = -1;
    double best_delta = -1e-12;
    for (int i = 0; i < instance.n_sites(); ++i) {
      const double d = flip_delta(adj, h, config, i);
      if (d < best_delta) {
        best_delta = d;
        best_site = i;
      }
    }
    if (best_site < 0) return config;
    config[best_site] = -config[best_site];
  }
}

bool is_local_minimum(const Instance& instance, const SpinConfiguration& config) {
  const auto adj = instance.adjacency();
  for (int i = 0; i < instance.n_sites(); ++i)
    if (flip_delta(adj, instance.fields(), config, i) < -1e-12) return false;
  return true;
}

std::vector<LocalMinimum> sample_local_minima(const Instance& instance, const StaParams& weak,
                                              int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  const bool symmetric = all_fields_zero(instance);
  std::map<SpinConfiguration, LocalMinimum> found;
  for (int k = 0; k < n_runs; ++k) {
    StaParams p = weak;
    p.seed = weak.seed + static_cast<std::uint64_t>(k);
    auto c = quench(instance, sta(instance, p).config);
    if (symmetric) c = canonical(c);
    auto [it, fresh] = found.try_emplace(c);
    if (fresh) {
      it->second.config = c;
      it->second.energy = classical_energy(instance, c);
    }
    ++it->second.hits;
  }
  std::vector<LocalMinimum> out;
  for (auto& [key, m] : found) out.push_back(std::move(m));
  std::stable_sort(out.begin(), out.end(),
                   [](const LocalMinimum& a, const LocalMinimum& b) { return a.energy < b.energy; });
  return out;
}

}  // namespace qwa
