#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "qwa/instance.hpp"
#include "qwa/rng.hpp"

using namespace qwa;

namespace {

Instance ferro_chain(int n, double j = 1.0) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, j});
  return Instance(Chain{n}, 0, edges, std::vector<double>(n, 0.0));
}

}  // namespace

TEST(Generate, LadderCounts) {
  auto inst = generate(Ladder{5, 2}, 3);
  EXPECT_EQ(inst.n_sites(), 10);
  EXPECT_EQ(inst.edges().size(), 13u);
  auto wide = generate(Ladder{6, 4}, 3);
  EXPECT_EQ(wide.edges().size(), static_cast<std::size_t>(4 * 5 + 6 * 3));
}

TEST(Generate, SmallestChain) {
  auto inst = generate(Chain{2}, 11);
  ASSERT_EQ(inst.edges().size(), 1u);
  EXPECT_LE(std::abs(inst.edges()[0].coupling), 1.0);
}

TEST(Generate, RandomRegularDegrees) {
  auto inst = generate(RandomRegular{20, 3}, 5);
  EXPECT_EQ(inst.edges().size(), 30u);
  for (const auto& nb : inst.adjacency()) EXPECT_EQ(nb.size(), 3u);
  EXPECT_TRUE(is_connected(inst));
}

TEST(Generate, Deterministic) {
  EXPECT_EQ(generate(Ladder{40, 2}, 9), generate(Ladder{40, 2}, 9));
  EXPECT_EQ(generate(RandomRegular{30, 3}, 2), generate(RandomRegular{30, 3}, 2));
  EXPECT_FALSE(generate(Ladder{40, 2}, 9) == generate(Ladder{40, 2}, 10));
}

TEST(Generate, CouplingsInRange) {
  auto inst = generate(Ladder{80, 2}, 1);
  double lo = 1.0, hi = -1.0;
  for (const auto& e : inst.edges()) {
    lo = std::min(lo, e.coupling);
    hi = std::max(hi, e.coupling);
  }
  EXPECT_GE(lo, -1.0);
  EXPECT_LE(hi, 1.0);
  EXPECT_LT(lo, -0.8);
  EXPECT_GT(hi, 0.8);
}

TEST(Generate, RejectsBadGeometry) {
  EXPECT_THROW(generate(Chain{1}, 0), std::invalid_argument);
  EXPECT_THROW(generate(Ladder{3, 0}, 0), std::invalid_argument);
  EXPECT_THROW(generate(RandomRegular{7, 3}, 0), std::invalid_argument);
  EXPECT_THROW(generate(RandomRegular{4, 4}, 0), std::invalid_argument);
}

TEST(Instance, ValidatesStructure) {
  std::vector<double> h(3, 0.0);
  EXPECT_THROW(Instance(Chain{3}, 0, {{0, 1, 1.0}}, h), std::invalid_argument);
  EXPECT_THROW(Instance(Chain{3}, 0, {{0, 1, 1.0}, {1, 2, 1.5}}, h), std::invalid_argument);
  EXPECT_THROW(Instance(Chain{3}, 0, {{0, 1, 1.0}, {1, 1, 0.5}}, h), std::invalid_argument);
  EXPECT_THROW(Instance(Chain{3}, 0, {{0, 1, 1.0}, {1, 0, 0.5}}, h), std::invalid_argument);
  EXPECT_NO_THROW(Instance(Chain{3}, 0, {{0, 1, 1.0}, {2, 1, 0.5}}, h));
}

TEST(ClassicalEnergy, Examples) {
  EXPECT_DOUBLE_EQ(classical_energy(ferro_chain(3), {1, 1, 1}), -2.0);
  EXPECT_DOUBLE_EQ(classical_energy(ferro_chain(2, -1.0), {1, 1}), 1.0);
  EXPECT_THROW(classical_energy(ferro_chain(3), {1, 1}), std::invalid_argument);
}

TEST(ClassicalEnergy, FlipSymmetryAndBound) {
  auto inst = generate(Ladder{6, 2}, 4);
  Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    SpinConfiguration c(inst.n_sites());
    for (auto& s : c) s = rng.below(2) ? 1 : -1;
    const double e = classical_energy(inst, c);
    EXPECT_EQ(e, classical_energy(inst, flipped(c)));
    EXPECT_LE(std::abs(e), energy_bound(inst));
  }
}

TEST(Serialization, RoundTrip) {
  auto inst = generate(Ladder{40, 2}, 21).with_field(3, 1e-6);
  EXPECT_EQ(parse_instance(serialize(inst)), inst);
  auto rrg = generate(RandomRegular{16, 3}, 2);
  EXPECT_EQ(parse_instance(serialize(rrg)), rrg);
  EXPECT_EQ(serialize(parse_instance(serialize(inst))), serialize(inst));
}

TEST(Serialization, Rejections) {
  const std::string good = serialize(ferro_chain(3));
  auto with_line = [&](const std::string& from, const std::string& to) {
    std::string text = good;
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  EXPECT_NO_THROW(parse_instance(good));
  // Duplicate edge.
  const std::string dup = with_line("end", "edge 1 0 0x1p+0\nend");
  EXPECT_THROW(parse_instance(dup), ParseError);
  // Out-of-range coupling.
  const std::string big = with_line("edge 0 1 0x1p+0", "edge 0 1 1.5");
  try {
    parse_instance(big);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
  EXPECT_THROW(parse_instance("qwa-instance 1\ngeometry chain 3\n"), ParseError);
  EXPECT_THROW(parse_instance("nonsense"), ParseError);
}

TEST(Serialization, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "qwa_instance_test.txt";
  auto inst = generate(Chain{12}, 4);
  write_instance_file(inst, path.string());
  EXPECT_EQ(read_instance_file(path.string()), inst);
  std::filesystem::remove(path);
  EXPECT_THROW(read_instance_file(path.string()), std::runtime_error);
}

TEST(ExactFormat, RoundTripsEveryBit) {
  for (double x : {0.1, -0.7312, 1.0, -1.0, 5e-324, 0.0, 1e-6}) EXPECT_EQ(parse_exact(format_exact(x)), x);
  EXPECT_EQ(parse_exact("0.25"), 0.25);
  EXPECT_THROW(parse_exact("nan"), std::invalid_argument);
  EXPECT_THROW(parse_exact("1.0x"), std::invalid_argument);
}

TEST(Geometry, LabelsParse) {
  EXPECT_EQ(geometry_label(parse_geometry("ladder 40 2")), "ladder 40 2");
  EXPECT_EQ(geometry_label(parse_geometry("chain 20")), "chain 20");
  EXPECT_EQ(geometry_label(parse_geometry("random-regular 20 3")), "rrg 20 3");
  EXPECT_THROW(parse_geometry("torus 3"), std::invalid_argument);
}

TEST(Config, StringRoundTrip) {
  SpinConfiguration c{1, -1, -1, 1};
  EXPECT_EQ(config_string(c), "+--+");
  EXPECT_EQ(parse_config("+--+"), c);
  EXPECT_THROW(parse_config("+x"), std::invalid_argument);
}
