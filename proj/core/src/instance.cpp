#include "qwa/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "qwa/rng.hpp"

namespace qwa {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::pair<int, int> ordered(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Edge list of a chain or ladder in the fixed draw order: column by column,
// rungs first, then the legs leaving the column.
std::vector<std::pair<int, int>> lattice_edges(int length, int width) {
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x < length; ++x) {
    for (int y = 0; y + 1 < width; ++y) out.emplace_back(x * width + y, x * width + y + 1);
    if (x + 1 < length)
      for (int y = 0; y < width; ++y) out.emplace_back(x * width + y, (x + 1) * width + y);
  }
  return out;
}

void validate_geometry(const Geometry& g) {
  std::visit(Overloaded{
                 [](const Chain& c) {
                   if (c.length < 1) throw std::invalid_argument("chain length must be >= 1");
                 },
                 [](const Ladder& l) {
                   if (l.length < 1 || l.width < 1)
                     throw std::invalid_argument("ladder needs length >= 1 and width >= 1");
                 },
                 [](const RandomRegular& r) {
                   if (r.n_sites < 2 || r.degree < 1)
                     throw std::invalid_argument("random regular graph needs N >= 2 and K >= 1");
                   if (r.degree >= r.n_sites)
                     throw std::invalid_argument("random regular graph needs K < N");
                   if ((static_cast<long>(r.n_sites) * r.degree) % 2 != 0)
                     throw std::invalid_argument("random regular graph needs N*K even");
                 },
             },
             g);
}

std::vector<std::pair<int, int>> sample_regular_graph(const RandomRegular& g, Rng& rng) {
  const int stubs_n = g.n_sites * g.degree;
  std::vector<int> stubs(stubs_n);
  for (int attempt = 0; attempt < kRandomRegularRetries; ++attempt) {
    for (int s = 0; s < stubs_n; ++s) stubs[s] = s / g.degree;
    for (int s = stubs_n - 1; s > 0; --s) {
      const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(s) + 1));
      std::swap(stubs[s], stubs[k]);
    }
    std::set<std::pair<int, int>> seen;
    bool simple = true;
    for (int s = 0; s < stubs_n && simple; s += 2) {
      if (stubs[s] == stubs[s + 1] || !seen.insert(ordered(stubs[s], stubs[s + 1])).second)
        simple = false;
    }
    if (!simple) continue;
    std::vector<std::pair<int, int>> edges(seen.begin(), seen.end());
    std::vector<Edge> probe;
    probe.reserve(edges.size());
    for (auto [i, j] : edges) probe.push_back({i, j, 0.0});
    Instance candidate(g, 0, std::move(probe), std::vector<double>(g.n_sites, 0.0));
    if (!is_connected(candidate)) continue;
    return edges;
  }
  throw std::runtime_error("random regular graph sampling failed after " +
                           std::to_string(kRandomRegularRetries) + " retries");
}

}  // namespace

int geometry_sites(const Geometry& g) {
  return std::visit(Overloaded{
                        [](const Chain& c) { return c.length; },
                        [](const Ladder& l) { return l.length * l.width; },
                        [](const RandomRegular& r) { return r.n_sites; },
                    },
                    g);
}

std::string geometry_label(const Geometry& g) {
  return std::visit(
      Overloaded{
          [](const Chain& c) { return "chain " + std::to_string(c.length); },
          [](const Ladder& l) {
            return "ladder " + std::to_string(l.length) + " " + std::to_string(l.width);
          },
          [](const RandomRegular& r) {
            return "rrg " + std::to_string(r.n_sites) + " " + std::to_string(r.degree);
          },
      },
      g);
}

Geometry parse_geometry(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind;
  in >> kind;
  std::vector<int> args;
  std::string tok;
  while (in >> tok) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      throw std::invalid_argument("bad geometry parameter '" + tok + "'");
    args.push_back(v);
  }
  Geometry g;
  if (kind == "chain" && args.size() == 1) {
    g = Chain{args[0]};
  } else if (kind == "ladder" && args.size() == 2) {
    g = Ladder{args[0], args[1]};
  } else if ((kind == "rrg" || kind == "random-regular") && args.size() == 2) {
    g = RandomRegular{args[0], args[1]};
  } else {
    throw std::invalid_argument("unknown geometry '" + std::string(text) +
                                "' (expected 'chain L', 'ladder L w' or 'rrg N K')");
  }
  validate_geometry(g);
  return g;
}

Instance::Instance(Geometry geometry, std::uint64_t seed, std::vector<Edge> edges,
                   std::vector<double> fields)
    : geometry_(geometry), seed_(seed), edges_(std::move(edges)), fields_(std::move(fields)) {
  validate_geometry(geometry_);
  const int n = geometry_sites(geometry_);
  if (static_cast<int>(fields_.size()) != n)
    throw std::invalid_argument("field vector has " + std::to_string(fields_.size()) +
                                " entries for " + std::to_string(n) + " sites");
  for (double h : fields_)
    if (!std::isfinite(h)) throw std::invalid_argument("non-finite longitudinal field");

  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw std::invalid_argument("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                  ") references a site outside [0," + std::to_string(n) + ")");
    if (e.i == e.j) throw std::invalid_argument("self-loop at site " + std::to_string(e.i));
    if (!(std::abs(e.coupling) <= 1.0))
      throw std::invalid_argument("coupling outside [-1,1] on edge (" + std::to_string(e.i) +
                                  "," + std::to_string(e.j) + ")");
    if (!seen.insert(ordered(e.i, e.j)).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.i) + "," +
                                  std::to_string(e.j) + ")");
  }

  std::visit(Overloaded{
                 [&](const Chain& c) {
                   std::set<std::pair<int, int>> want;
                   for (auto p : lattice_edges(c.length, 1)) want.insert(p);
                   if (want != seen) throw std::invalid_argument("edges do not form a chain");
                 },
                 [&](const Ladder& l) {
                   std::set<std::pair<int, int>> want;
                   for (auto p : lattice_edges(l.length, l.width)) want.insert(p);
                   if (want != seen) throw std::invalid_argument("edges do not form a ladder");
                 },
                 [&](const RandomRegular& r) {
                   std::vector<int> degree(n, 0);
                   for (const Edge& e : edges_) {
                     ++degree[e.i];
                     ++degree[e.j];
                   }
                   for (int d : degree)
                     if (d != r.degree)
                       throw std::invalid_argument("graph is not " + std::to_string(r.degree) +
                                                   "-regular");
                 },
             },
             geometry_);
}

bool Instance::has_fields() const {
  return std::any_of(fields_.begin(), fields_.end(), [](double h) { return h != 0.0; });
}

Instance Instance::with_field(int site, double h) const {
  if (site < 0 || site >= n_sites()) throw std::out_of_range("field site out of range");
  auto f = fields_;
  f[site] = h;
  return with_fields(std::move(f));
}

Instance Instance::with_fields(std::vector<double> fields) const {
  return Instance(geometry_, seed_, edges_, std::move(fields));
}

std::vector<std::vector<std::pair<int, double>>> Instance::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(n_sites());
  for (const Edge& e : edges_) {
    adj[e.i].emplace_back(e.j, e.coupling);
    adj[e.j].emplace_back(e.i, e.coupling);
  }
  return adj;
}

Instance generate(const Geometry& geometry, std::uint64_t seed) {
  validate_geometry(geometry);
  Rng rng(seed);
  std::vector<std::pair<int, int>> pairs = std::visit(
      Overloaded{
          [](const Chain& c) {
            if (c.length < 2) throw std::invalid_argument("generated chains need L >= 2");
            return lattice_edges(c.length, 1);
          },
          [](const Ladder& l) {
            if (l.length < 2) throw std::invalid_argument("generated ladders need L >= 2");
            return lattice_edges(l.length, l.width);
          },
          [&](const RandomRegular& r) { return sample_regular_graph(r, rng); },
      },
      geometry);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) edges.push_back({i, j, rng.uniform(-1.0, 1.0)});
  return Instance(geometry, seed, std::move(edges),
                  std::vector<double>(geometry_sites(geometry), 0.0));
}

double classical_energy(const Instance& instance, const SpinConfiguration& config) {
  if (static_cast<int>(config.size()) != instance.n_sites())
    throw std::invalid_argument("configuration has " + std::to_string(config.size()) +
                                " spins, instance has " + std::to_string(instance.n_sites()));
  double e = 0.0;
  for (const Edge& edge : instance.edges()) e -= edge.coupling * config[edge.i] * config[edge.j];
  const auto& h = instance.fields();
  for (std::size_t i = 0; i < h.size(); ++i) e -= h[i] * config[i];
  return e;
}

double energy_bound(const Instance& instance) {
  double b = 0.0;
  for (const Edge& e : instance.edges()) b += std::abs(e.coupling);
  for (double h : instance.fields()) b += std::abs(h);
  return b;
}

bool is_connected(const Instance& instance) {
  const int n = instance.n_sites();
  if (n <= 1) return true;
  auto adj = instance.adjacency();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [u, _] : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
  }
  return count == n;
}

std::string format_exact(double value) {
  char buf[64];
  const bool neg = std::signbit(value);
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::abs(value), std::chars_format::hex);
  if (ec != std::errc{}) throw std::runtime_error("cannot format value");
  return std::string(neg ? "-0x" : "0x") + std::string(buf, end);
}

double parse_exact(std::string_view token) {
  std::string_view t = token;
  bool neg = false;
  if (!t.empty() && (t.front() == '-' || t.front() == '+')) {
    neg = t.front() == '-';
    t.remove_prefix(1);
  }
  double v = 0.0;
  std::from_chars_result r{};
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    t.remove_prefix(2);
    r = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::hex);
  } else {
    r = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::general);
  }
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size() || !std::isfinite(v))
    throw std::invalid_argument("not a finite number: '" + std::string(token) + "'");
  return neg ? -v : v;
}

std::string serialize(const Instance& instance) {
  std::ostringstream out;
  out << "qwa-instance 1\n";
  out << "geometry " << geometry_label(instance.geometry()) << "\n";
  out << "seed " << instance.seed() << "\n";
  out << "sites " << instance.n_sites() << "\n";
  for (const Edge& e : instance.edges())
    out << "edge " << e.i << " " << e.j << " " << format_exact(e.coupling) << "\n";
  const auto& h = instance.fields();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0.0) out << "field " << i << " " << format_exact(h[i]) << "\n";
  out << "end\n";
  return out.str();
}

Instance parse_instance(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  bool header = false, done = false;
  std::optional<Geometry> geometry;
  std::optional<std::uint64_t> seed;
  std::optional<int> sites;
  std::vector<Edge> edges;
  std::vector<std::pair<int, double>> fields;
  std::set<std::pair<int, int>> seen;

  auto parse_int = [&](const std::string& tok, const char* what) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      throw ParseError(line_no, std::string("bad ") + what + " '" + tok + "'");
    return v;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (done) throw ParseError(line_no, "content after 'end'");
    if (!header) {
      if (tok.size() != 2 || tok[0] != "qwa-instance" || tok[1] != "1")
        throw ParseError(line_no, "expected header 'qwa-instance 1'");
      header = true;
      continue;
    }
    const std::string& kind = tok[0];
    if (kind == "geometry") {
      std::string rest;
      for (std::size_t k = 1; k < tok.size(); ++k) rest += (k > 1 ? " " : "") + tok[k];
      try {
        geometry = parse_geometry(rest);
      } catch (const std::exception& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (kind == "seed" && tok.size() == 2) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), v);
      if (ec != std::errc{} || p != tok[1].data() + tok[1].size())
        throw ParseError(line_no, "bad seed '" + tok[1] + "'");
      seed = v;
    } else if (kind == "sites" && tok.size() == 2) {
      sites = static_cast<int>(parse_int(tok[1], "site count"));
    } else if (kind == "edge" && tok.size() == 4) {
      const int i = static_cast<int>(parse_int(tok[1], "site index"));
      const int j = static_cast<int>(parse_int(tok[2], "site index"));
      double J = 0.0;
      try {
        J = parse_exact(tok[3]);
      } catch (const std::exception& e) {
        throw ParseError(line_no, e.what());
      }
      if (!(std::abs(J) <= 1.0)) throw ParseError(line_no, "coupling " + tok[3] + " outside [-1,1]");
      if (i == j) throw ParseError(line_no, "self-loop");
      if (!seen.insert(ordered(i, j)).second)
        throw ParseError(line_no, "duplicate edge (" + tok[1] + "," + tok[2] + ")");
      edges.push_back({i, j, J});
    } else if (kind == "field" && tok.size() == 3) {
      const int i = static_cast<int>(parse_int(tok[1], "site index"));
      try {
        fields.emplace_back(i, parse_exact(tok[2]));
      } catch (const std::exception& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (kind == "end" && tok.size() == 1) {
      done = true;
    } else {
      throw ParseError(line_no, "unrecognized record '" + kind + "'");
    }
  }
  if (!header) throw ParseError(line_no, "empty document");
  if (!done) throw ParseError(line_no, "missing 'end' record");
  if (!geometry) throw ParseError(line_no, "missing 'geometry' record");
  if (!seed) throw ParseError(line_no, "missing 'seed' record");
  const int n = geometry_sites(*geometry);
  if (sites && *sites != n)
    throw ParseError(line_no, "'sites' disagrees with geometry (" + std::to_string(*sites) +
                                  " vs " + std::to_string(n) + ")");
  std::vector<double> h(n, 0.0);
  for (auto [i, v] : fields) {
    if (i < 0 || i >= n) throw ParseError(line_no, "field site " + std::to_string(i) + " out of range");
    h[i] = v;
  }
  try {
    return Instance(*geometry, *seed, std::move(edges), std::move(h));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

void write_instance_file(const Instance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file '" + path + "'");
  out << serialize(instance);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

SpinConfiguration flipped(const SpinConfiguration& config) {
  SpinConfiguration out(config.size());
  std::transform(config.begin(), config.end(), out.begin(), [](int s) { return -s; });
  return out;
}

std::string config_string(const SpinConfiguration& config) {
  std::string s;
  s.reserve(config.size());
  for (int v : config) s.push_back(v > 0 ? '+' : '-');
  return s;
}

SpinConfiguration parse_config(std::string_view text) {
  SpinConfiguration c;
  c.reserve(text.size());
  for (char ch : text) {
    if (ch == '+' || ch == 'u' || ch == '1') c.push_back(+1);
    else if (ch == '-' || ch == 'd' || ch == '0') c.push_back(-1);
    else throw std::invalid_argument(std::string("bad spin character '") + ch + "'");
  }
  return c;
}

}  // namespace qwa
