#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qwa/instance.hpp"
#include "qwa/rng.hpp"

namespace qwa {

// Physical index 0 is sigma^z = +1, index 1 is sigma^z = -1.
inline constexpr int kPhys = 2;
inline int spin_index(int spin) { return spin > 0 ? 0 : 1; }

// One rank-3 tensor, stored as a (left x right) matrix per physical index.
struct SiteTensor {
  std::array<Eigen::MatrixXd, kPhys> block;

  SiteTensor() = default;
  SiteTensor(int left, int right)
      : block{Eigen::MatrixXd::Zero(left, right), Eigen::MatrixXd::Zero(left, right)} {}

  int left_dim() const { return static_cast<int>(block[0].rows()); }
  int right_dim() const { return static_cast<int>(block[0].cols()); }

  // Reshapes (left*phys x right), row index s*left + a.
  Eigen::MatrixXd as_left_matrix() const;
  // Reshapes (left x phys*right), column index s*right + b.
  Eigen::MatrixXd as_right_matrix() const;
  static SiteTensor from_left_matrix(const Eigen::MatrixXd& m, int left);
  static SiteTensor from_right_matrix(const Eigen::MatrixXd& m, int right);
};

// Limits applied when a bond is cut.
struct TruncationPolicy {
  double eta = 1e-8;  // tolerated discarded weight per cut
  int m_max = 1024;
  int m_min = 2;
  // Never split a multiplet of singular values equal within 1e-12.
  bool keep_multiplets = true;

  void validate() const;
};

struct TruncationChoice {
  int kept = 0;
  double discarded = 0.0;
};

// Decide how many of the descending singular values survive. The discarded
// weight is relative to the total squared weight of the spectrum.
TruncationChoice choose_truncation(std::span<const double> singular_values,
                                   const TruncationPolicy& policy);

// Thin SVD of `m` cut according to `policy`; `s` holds the kept values
// renormalized to unit norm.
struct TruncatedSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd vt;
  TruncationChoice choice;
};
TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy);

// Open-boundary MPS with real tensors. Bond b sits to the left of site b, so
// bonds 0 and n have dimension 1.
class MatrixProductState {
 public:
  MatrixProductState() = default;
  MatrixProductState(std::vector<SiteTensor> sites, std::optional<int> center);

  int size() const { return static_cast<int>(sites_.size()); }
  const SiteTensor& operator[](int i) const { return sites_[i]; }
  SiteTensor& operator[](int i) { return sites_[i]; }

  std::optional<int> center() const { return center_; }
  void set_center(std::optional<int> c) { center_ = c; }

  int bond_dim(int bond) const;
  std::vector<int> bond_dims() const;
  int max_bond_dim() const;

  // Throws std::logic_error when neighbouring shapes disagree.
  void check_shapes() const;

 private:
  std::vector<SiteTensor> sites_;
  std::optional<int> center_;
};

MatrixProductState product_state_x(int n_sites);
MatrixProductState product_state(const SpinConfiguration& config);
MatrixProductState random_mps(int n_sites, int max_bond, Rng& rng);

// Global spin flip: applies sigma^x on every site.
MatrixProductState global_flip(const MatrixProductState& psi);

// QR-based gauge move; the result is normalized with its center at `site`.
void move_center(MatrixProductState& psi, int site);

// SVD at `bond` (center must sit on site bond-1 or bond); the center moves
// across the bond and the kept spectrum is renormalized.
TruncationChoice truncate_bond(MatrixProductState& psi, int bond, const TruncationPolicy& policy);

// Schmidt coefficients across `bond` (1..n-1), descending.
std::vector<double> schmidt_values(const MatrixProductState& psi, int bond);
double entanglement_entropy(std::span<const double> schmidt);  // natural log
double bond_entropy(const MatrixProductState& psi, int bond);
std::vector<double> bond_entropies(const MatrixProductState& psi);  // bonds 1..n-1
double max_bond_entropy(const MatrixProductState& psi);

double amplitude(const MatrixProductState& psi, const SpinConfiguration& config);
double overlap(const MatrixProductState& a, const MatrixProductState& b);
double norm(const MatrixProductState& psi);
double expect_sz(const MatrixProductState& psi, int site);
std::vector<double> expect_sz_all(const MatrixProductState& psi);

// Checkpoint text format with hex-float entries (exact round-trip).
void write_mps(const MatrixProductState& psi, std::ostream& out);
MatrixProductState read_mps(std::istream& in);

}  // namespace qwa
