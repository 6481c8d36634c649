#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qwa {

struct Chain {
  int length = 0;
  friend bool operator==(const Chain&, const Chain&) = default;
};

// L x w strip; site (x, y) has index x * w + y.
struct Ladder {
  int length = 0;
  int width = 0;
  friend bool operator==(const Ladder&, const Ladder&) = default;
};

struct RandomRegular {
  int n_sites = 0;
  int degree = 0;
  friend bool operator==(const RandomRegular&, const RandomRegular&) = default;
};

using Geometry = std::variant<Chain, Ladder, RandomRegular>;

int geometry_sites(const Geometry& g);
std::string geometry_label(const Geometry& g);  // "chain 20", "ladder 40 2", "rrg 20 3"
Geometry parse_geometry(std::string_view text);

struct Edge {
  int i = 0;
  int j = 0;
  double coupling = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

using SpinConfiguration = std::vector<int>;  // entries +1 / -1

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& detail, const std::string& source = {})
      : std::runtime_error((source.empty() ? "line " : source + ":") + std::to_string(line) +
                           ": " + detail),
        line_(line),
        detail_(detail) {}
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string detail_;
};

// A spin-glass problem: H = -sum J_ij s_i s_j - sum h_i s_i on a graph.
// Immutable once built; the constructor enforces every structural invariant.
class Instance {
 public:
  Instance(Geometry geometry, std::uint64_t seed, std::vector<Edge> edges,
           std::vector<double> fields);

  int n_sites() const { return static_cast<int>(fields_.size()); }
  const Geometry& geometry() const { return geometry_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& fields() const { return fields_; }
  bool has_fields() const;

  // Copy with one longitudinal field replaced.
  Instance with_field(int site, double h) const;
  Instance with_fields(std::vector<double> fields) const;

  // Adjacency lists: (neighbour, coupling).
  std::vector<std::vector<std::pair<int, double>>> adjacency() const;

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  Geometry geometry_;
  std::uint64_t seed_;
  std::vector<Edge> edges_;
  std::vector<double> fields_;
};

// Deterministic in (geometry, seed); couplings uniform in [-1, 1), fields zero.
Instance generate(const Geometry& geometry, std::uint64_t seed);

// Retry budget of the configuration-model sampler for random regular graphs.
inline constexpr int kRandomRegularRetries = 10000;

double classical_energy(const Instance& instance, const SpinConfiguration& config);

// Sum |J| + sum |h|; bounds |classical_energy| for every configuration.
double energy_bound(const Instance& instance);

bool is_connected(const Instance& instance);

std::string serialize(const Instance& instance);
Instance parse_instance(std::string_view text);

Instance read_instance_file(const std::string& path);
void write_instance_file(const Instance& instance, const std::string& path);

// Shared by the text formats: hex-float rendering and exact parsing.
std::string format_exact(double value);
double parse_exact(std::string_view token);

SpinConfiguration flipped(const SpinConfiguration& config);
std::string config_string(const SpinConfiguration& config);  // "+-+-"
SpinConfiguration parse_config(std::string_view text);

}  // namespace qwa
