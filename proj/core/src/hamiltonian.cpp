#include "qwa/hamiltonian.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>

#include "environment.hpp"

namespace qwa {

namespace {

const Eigen::Matrix2d kIdentity = Eigen::Matrix2d::Identity();
const Eigen::Matrix2d kPauliZ = (Eigen::Matrix2d() << 1, 0, 0, -1).finished();
const Eigen::Matrix2d kPauliX = (Eigen::Matrix2d() << 0, 1, 1, 0).finished();

int bandwidth_of(const Instance& instance, const std::vector<int>& position) {
  int bw = 0;
  for (const Edge& e : instance.edges()) bw = std::max(bw, std::abs(position[e.i] - position[e.j]));
  return bw;
}

// Cuthill-McKee from `start`: breadth-first, neighbours by (degree, index).
std::vector<int> cuthill_mckee(const std::vector<std::vector<int>>& adj, int start) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::deque<int> queue{start};
  seen[start] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        queue.push_back(u);
      }
  }
  return order;
}

}  // namespace

SiteOrdering make_ordering(const Instance& instance, std::vector<int> site_at) {
  const int n = instance.n_sites();
  if (static_cast<int>(site_at.size()) != n)
    throw std::invalid_argument("ordering length does not match the instance");
  SiteOrdering o;
  o.position.assign(n, -1);
  for (int p = 0; p < n; ++p) {
    const int s = site_at[p];
    if (s < 0 || s >= n || o.position[s] != -1)
      throw std::invalid_argument("ordering is not a permutation of the sites");
    o.position[s] = p;
  }
  o.site_at = std::move(site_at);
  o.bandwidth = bandwidth_of(instance, o.position);
  return o;
}

SiteOrdering order_sites(const Instance& instance) {
  const int n = instance.n_sites();
  if (!is_connected(instance)) throw std::invalid_argument("cannot order a disconnected graph");
  std::vector<int> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  if (!std::holds_alternative<RandomRegular>(instance.geometry()))
    return make_ordering(instance, identity);

  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : instance.edges()) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  for (auto& nb : adj)
    std::sort(nb.begin(), nb.end(), [&](int a, int b) {
      return adj[a].size() != adj[b].size() ? adj[a].size() < adj[b].size() : a < b;
    });

  SiteOrdering best = make_ordering(instance, identity);
  for (int start = 0; start < n; ++start) {
    auto order = cuthill_mckee(adj, start);
    auto cm = make_ordering(instance, order);
    if (cm.bandwidth < best.bandwidth) best = cm;
    std::reverse(order.begin(), order.end());
    auto rcm = make_ordering(instance, std::move(order));
    if (rcm.bandwidth < best.bandwidth) best = rcm;
  }
  return best;
}

MatrixProductOperator::MatrixProductOperator(std::vector<MpoSite> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("an MPO needs at least one site");
  if (sites_.front().left_dim != 1 || sites_.back().right_dim != 1)
    throw std::invalid_argument("MPO boundary bonds must have dimension 1");
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i)
    if (sites_[i].right_dim != sites_[i + 1].left_dim)
      throw std::invalid_argument("MPO bond mismatch after site " + std::to_string(i));
}

std::vector<int> MatrixProductOperator::bond_dims() const {
  std::vector<int> d;
  d.push_back(sites_.front().left_dim);
  for (const auto& s : sites_) d.push_back(s.right_dim);
  return d;
}

int MatrixProductOperator::max_bond_dim() const {
  auto d = bond_dims();
  return *std::max_element(d.begin(), d.end());
}

MatrixProductOperator build_mpo(const Instance& instance, const SiteOrdering& ordering,
                                double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("transverse field must be >= 0");
  const int n = instance.n_sites();
  if (ordering.size() != n) throw std::invalid_argument("ordering does not match the instance");

  // Couplings in chain positions: bonds[q][r] = J for q < r.
  std::vector<std::map<int, double>> couplings(n);
  std::vector<int> reach(n, -1);  // furthest right partner of each position
  for (const Edge& e : instance.edges()) {
    int q = ordering.position[e.i], r = ordering.position[e.j];
    if (q > r) std::swap(q, r);
    couplings[q][r] = e.coupling;
    reach[q] = std::max(reach[q], r);
  }

  // Channels of bond b: start (if b < n), open carriers, end (if b > 0).
  struct BondChannels {
    int start = -1, end = -1, dim = 0;
    std::map<int, int> carrier;  // source position -> channel
  };
  std::vector<BondChannels> bonds(n + 1);
  for (int b = 0; b <= n; ++b) {
    auto& bc = bonds[b];
    if (b < n) bc.start = bc.dim++;
    for (int q = std::max(0, b - ordering.bandwidth); q < b; ++q)
      if (reach[q] >= b) bc.carrier[q] = bc.dim++;
    if (b > 0) bc.end = bc.dim++;
  }

  const auto& h = instance.fields();
  std::vector<MpoSite> sites(n);
  for (int p = 0; p < n; ++p) {
    const auto& lb = bonds[p];
    const auto& rb = bonds[p + 1];
    MpoSite& w = sites[p];
    w.left_dim = lb.dim;
    w.right_dim = rb.dim;
    if (rb.start >= 0) w.terms.push_back({lb.start, rb.start, kIdentity});
    const double hp = h[ordering.site_at[p]];
    w.terms.push_back({lb.start, rb.end, -gamma * kPauliX - hp * kPauliZ});
    if (auto it = rb.carrier.find(p); it != rb.carrier.end())
      w.terms.push_back({lb.start, it->second, kPauliZ});
    for (auto [q, ch] : lb.carrier) {
      if (auto c = couplings[q].find(p); c != couplings[q].end())
        w.terms.push_back({ch, rb.end, -c->second * kPauliZ});
      if (auto it = rb.carrier.find(q); it != rb.carrier.end())
        w.terms.push_back({ch, it->second, kIdentity});
    }
    if (lb.end >= 0) w.terms.push_back({lb.end, rb.end, kIdentity});
  }
  return MatrixProductOperator(std::move(sites));
}

double energy(const MatrixProductState& psi, const MatrixProductOperator& mpo) {
  if (psi.size() != mpo.size())
    throw std::invalid_argument("MPS has " + std::to_string(psi.size()) + " sites, MPO has " +
                                std::to_string(mpo.size()));
  detail::Env env = detail::boundary_env(1, 0);
  for (int i = 0; i < psi.size(); ++i) env = detail::extend_left(env, psi[i], mpo[i]);
  return env[0](0, 0) / overlap(psi, psi);
}

SpinConfiguration to_chain_order(const SpinConfiguration& by_site, const SiteOrdering& ordering) {
  SpinConfiguration out(by_site.size());
  for (std::size_t s = 0; s < by_site.size(); ++s) out[ordering.position[s]] = by_site[s];
  return out;
}

SpinConfiguration to_site_order(const SpinConfiguration& by_position,
                                const SiteOrdering& ordering) {
  SpinConfiguration out(by_position.size());
  for (std::size_t p = 0; p < by_position.size(); ++p) out[ordering.site_at[p]] = by_position[p];
  return out;
}

}  // namespace qwa
