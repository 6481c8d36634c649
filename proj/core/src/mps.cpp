#include "qwa/mps.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qwa {

namespace {

constexpr double kDegeneracyTol = 1e-12;

// Thin QR of m = q * r.
void thin_qr(const Eigen::MatrixXd& m, Eigen::MatrixXd& q, Eigen::MatrixXd& r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

void left_orthogonalize(MatrixProductState& psi, int i) {
  Eigen::MatrixXd q, r;
  thin_qr(psi[i].as_left_matrix(), q, r);
  psi[i] = SiteTensor::from_left_matrix(q, psi[i].left_dim());
  for (auto& b : psi[i + 1].block) b = r * b;
}

void right_orthogonalize(MatrixProductState& psi, int i) {
  Eigen::MatrixXd q, r;
  thin_qr(psi[i].as_right_matrix().transpose(), q, r);
  psi[i] = SiteTensor::from_right_matrix(q.transpose(), psi[i].right_dim());
  for (auto& b : psi[i - 1].block) b = b * r.transpose();
}

void normalize_site(SiteTensor& t) {
  const double nrm = std::sqrt(t.block[0].squaredNorm() + t.block[1].squaredNorm());
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::runtime_error("cannot normalize a zero MPS");
  for (auto& b : t.block) b /= nrm;
}

// Left environments <psi|psi> up to (excluding) each site; env[0] = [1].
std::vector<Eigen::MatrixXd> left_overlap_envs(const MatrixProductState& psi) {
  std::vector<Eigen::MatrixXd> env(psi.size() + 1);
  env[0] = Eigen::MatrixXd::Ones(1, 1);
  for (int i = 0; i < psi.size(); ++i) {
    env[i + 1] = Eigen::MatrixXd::Zero(psi[i].right_dim(), psi[i].right_dim());
    for (const auto& b : psi[i].block) env[i + 1].noalias() += b.transpose() * (env[i] * b);
  }
  return env;
}

std::vector<Eigen::MatrixXd> right_overlap_envs(const MatrixProductState& psi) {
  const int n = psi.size();
  std::vector<Eigen::MatrixXd> env(n + 1);
  env[n] = Eigen::MatrixXd::Ones(1, 1);
  for (int i = n - 1; i >= 0; --i) {
    env[i] = Eigen::MatrixXd::Zero(psi[i].left_dim(), psi[i].left_dim());
    for (const auto& b : psi[i].block) env[i].noalias() += b * (env[i + 1] * b.transpose());
  }
  return env;
}

}  // namespace

Eigen::MatrixXd SiteTensor::as_left_matrix() const {
  const int l = left_dim(), r = right_dim();
  Eigen::MatrixXd m(kPhys * l, r);
  for (int s = 0; s < kPhys; ++s) m.middleRows(s * l, l) = block[s];
  return m;
}

Eigen::MatrixXd SiteTensor::as_right_matrix() const {
  const int l = left_dim(), r = right_dim();
  Eigen::MatrixXd m(l, kPhys * r);
  for (int s = 0; s < kPhys; ++s) m.middleCols(s * r, r) = block[s];
  return m;
}

SiteTensor SiteTensor::from_left_matrix(const Eigen::MatrixXd& m, int left) {
  SiteTensor t;
  for (int s = 0; s < kPhys; ++s) t.block[s] = m.middleRows(s * left, left);
  return t;
}

SiteTensor SiteTensor::from_right_matrix(const Eigen::MatrixXd& m, int right) {
  SiteTensor t;
  for (int s = 0; s < kPhys; ++s) t.block[s] = m.middleCols(s * right, right);
  return t;
}

void TruncationPolicy::validate() const {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
  if (m_min < 1 || m_max < 1) throw std::invalid_argument("m_min and m_max must be positive");
  if (m_min > m_max) throw std::invalid_argument("m_min must not exceed m_max");
}

TruncationChoice choose_truncation(std::span<const double> sv, const TruncationPolicy& policy) {
  const int n = static_cast<int>(sv.size());
  if (n == 0) return {0, 0.0};
  // tail[k] = weight discarded when keeping the first k values.
  std::vector<double> tail(n + 1, 0.0);
  for (int k = n - 1; k >= 0; --k) tail[k] = tail[k + 1] + sv[k] * sv[k];
  const double total = tail[0];
  if (!(total > 0.0)) return {std::min(std::max(1, policy.m_min), n), 0.0};

  int kept = 1;
  while (kept < n && tail[kept] > policy.eta * total) ++kept;
  if (policy.keep_multiplets) {
    const double scale = sv[0];
    while (kept < n && sv[kept] > kDegeneracyTol * scale &&
           sv[kept - 1] - sv[kept] <= kDegeneracyTol * scale)
      ++kept;
  }
  kept = std::max(kept, policy.m_min);
  kept = std::min({kept, policy.m_max, n});
  return {kept, tail[kept] / total};
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  std::vector<double> sv(s.data(), s.data() + s.size());
  TruncatedSvd out;
  out.choice = choose_truncation(sv, policy);
  const int k = out.choice.kept;
  out.u = svd.matrixU().leftCols(k);
  out.vt = svd.matrixV().leftCols(k).transpose();
  out.s = s.head(k);
  const double nrm = out.s.norm();
  if (nrm > 0.0) out.s /= nrm;
  return out;
}

MatrixProductState::MatrixProductState(std::vector<SiteTensor> sites, std::optional<int> center)
    : sites_(std::move(sites)), center_(center) {
  if (sites_.empty()) throw std::invalid_argument("an MPS needs at least one site");
  if (center_ && (*center_ < 0 || *center_ >= size()))
    throw std::invalid_argument("orthogonality center out of range");
  check_shapes();
}

int MatrixProductState::bond_dim(int bond) const {
  if (bond == size()) return sites_.back().right_dim();
  return sites_.at(bond).left_dim();
}

std::vector<int> MatrixProductState::bond_dims() const {
  std::vector<int> d(size() + 1);
  for (int b = 0; b <= size(); ++b) d[b] = bond_dim(b);
  return d;
}

int MatrixProductState::max_bond_dim() const {
  auto d = bond_dims();
  return *std::max_element(d.begin(), d.end());
}

void MatrixProductState::check_shapes() const {
  if (sites_.front().left_dim() != 1 || sites_.back().right_dim() != 1)
    throw std::logic_error("boundary bonds must have dimension 1");
  for (int i = 0; i < size(); ++i) {
    if (sites_[i].block[0].rows() != sites_[i].block[1].rows() ||
        sites_[i].block[0].cols() != sites_[i].block[1].cols())
      throw std::logic_error("physical blocks differ in shape at site " + std::to_string(i));
    if (i + 1 < size() && sites_[i].right_dim() != sites_[i + 1].left_dim())
      throw std::logic_error("bond mismatch between sites " + std::to_string(i) + " and " +
                             std::to_string(i + 1));
  }
}

MatrixProductState product_state_x(int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
  SiteTensor t(1, 1);
  t.block[0](0, 0) = t.block[1](0, 0) = 1.0 / std::sqrt(2.0);
  return MatrixProductState(std::vector<SiteTensor>(n_sites, t), 0);
}

MatrixProductState product_state(const SpinConfiguration& config) {
  if (config.empty()) throw std::invalid_argument("empty configuration");
  std::vector<SiteTensor> sites;
  sites.reserve(config.size());
  for (int s : config) {
    SiteTensor t(1, 1);
    t.block[spin_index(s)](0, 0) = 1.0;
    sites.push_back(std::move(t));
  }
  return MatrixProductState(std::move(sites), 0);
}

MatrixProductState random_mps(int n_sites, int max_bond, Rng& rng) {
  if (n_sites < 1 || max_bond < 1) throw std::invalid_argument("bad random MPS shape");
  auto cap = [&](int bond) {
    const int e = std::min(bond, n_sites - bond);
    return e >= 30 ? max_bond : std::min(max_bond, 1 << e);
  };
  std::vector<SiteTensor> sites;
  for (int i = 0; i < n_sites; ++i) {
    SiteTensor t(cap(i), cap(i + 1));
    for (auto& b : t.block)
      for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = rng.uniform(-1.0, 1.0);
    sites.push_back(std::move(t));
  }
  MatrixProductState psi(std::move(sites), std::nullopt);
  move_center(psi, 0);
  return psi;
}

MatrixProductState global_flip(const MatrixProductState& psi) {
  MatrixProductState out = psi;
  for (int i = 0; i < out.size(); ++i) std::swap(out[i].block[0], out[i].block[1]);
  return out;
}

void move_center(MatrixProductState& psi, int site) {
  const int n = psi.size();
  if (site < 0 || site >= n) throw std::out_of_range("move_center target out of range");
  if (!psi.center()) {
    for (int i = 0; i < site; ++i) left_orthogonalize(psi, i);
    for (int i = n - 1; i > site; --i) right_orthogonalize(psi, i);
  } else {
    for (int i = *psi.center(); i < site; ++i) left_orthogonalize(psi, i);
    for (int i = *psi.center(); i > site; --i) right_orthogonalize(psi, i);
  }
  normalize_site(psi[site]);
  psi.set_center(site);
}

TruncationChoice truncate_bond(MatrixProductState& psi, int bond, const TruncationPolicy& policy) {
  policy.validate();
  const int n = psi.size();
  if (bond < 1 || bond >= n) throw std::out_of_range("bond must lie in [1, n-1]");
  if (!psi.center() || (*psi.center() != bond - 1 && *psi.center() != bond))
    throw std::invalid_argument("orthogonality center must be adjacent to the truncated bond");
  if (*psi.center() == bond - 1) {
    const int c = bond - 1;
    const int l = psi[c].left_dim();
    auto svd = truncated_svd(psi[c].as_left_matrix(), policy);
    psi[c] = SiteTensor::from_left_matrix(svd.u, l);
    const Eigen::MatrixXd sv = svd.s.asDiagonal() * svd.vt;
    for (auto& b : psi[c + 1].block) b = sv * b;
    psi.set_center(c + 1);
    return svd.choice;
  }
  const int c = bond;
  const int r = psi[c].right_dim();
  auto svd = truncated_svd(psi[c].as_right_matrix(), policy);
  psi[c] = SiteTensor::from_right_matrix(svd.vt, r);
  const Eigen::MatrixXd us = svd.u * svd.s.asDiagonal();
  for (auto& b : psi[c - 1].block) b = b * us;
  psi.set_center(c - 1);
  return svd.choice;
}

std::vector<double> schmidt_values(const MatrixProductState& psi, int bond) {
  if (bond < 1 || bond >= psi.size()) throw std::out_of_range("bond must lie in [1, n-1]");
  MatrixProductState work = psi;
  move_center(work, bond - 1);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(work[bond - 1].as_left_matrix());
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double entanglement_entropy(std::span<const double> schmidt) {
  double total = 0.0;
  for (double s : schmidt) total += s * s;
  double e = 0.0;
  for (double s : schmidt) {
    const double p = s * s / total;
    if (p > 0.0) e -= p * std::log(p);
  }
  return std::max(e, 0.0);
}

double bond_entropy(const MatrixProductState& psi, int bond) {
  return entanglement_entropy(schmidt_values(psi, bond));
}

std::vector<double> bond_entropies(const MatrixProductState& psi) {
  const int n = psi.size();
  std::vector<double> out;
  if (n < 2) return out;
  MatrixProductState work = psi;
  move_center(work, 0);
  for (int i = 0; i + 1 < n; ++i) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(work[i].as_left_matrix(),
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    out.push_back(entanglement_entropy(std::span<const double>(s.data(), s.size())));
    work[i] = SiteTensor::from_left_matrix(svd.matrixU(), work[i].left_dim());
    const Eigen::MatrixXd sv = s.asDiagonal() * svd.matrixV().transpose();
    for (auto& b : work[i + 1].block) b = sv * b;
  }
  return out;
}

double max_bond_entropy(const MatrixProductState& psi) {
  auto e = bond_entropies(psi);
  return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
}

double amplitude(const MatrixProductState& psi, const SpinConfiguration& config) {
  if (static_cast<int>(config.size()) != psi.size())
    throw std::invalid_argument("configuration length " + std::to_string(config.size()) +
                                " does not match MPS size " + std::to_string(psi.size()));
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (int i = 0; i < psi.size(); ++i) v = v * psi[i].block[spin_index(config[i])];
  return v(0);
}

double overlap(const MatrixProductState& a, const MatrixProductState& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("overlap of MPS with different sizes");
  Eigen::MatrixXd env = Eigen::MatrixXd::Ones(1, 1);
  for (int i = 0; i < a.size(); ++i) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(a[i].right_dim(), b[i].right_dim());
    for (int s = 0; s < kPhys; ++s) next.noalias() += a[i].block[s].transpose() * (env * b[i].block[s]);
    env = std::move(next);
  }
  return env(0, 0);
}

double norm(const MatrixProductState& psi) { return std::sqrt(std::max(overlap(psi, psi), 0.0)); }

std::vector<double> expect_sz_all(const MatrixProductState& psi) {
  const auto left = left_overlap_envs(psi);
  const auto right = right_overlap_envs(psi);
  const double nrm2 = left.back()(0, 0);
  std::vector<double> out(psi.size());
  for (int i = 0; i < psi.size(); ++i) {
    double v = 0.0;
    for (int s = 0; s < kPhys; ++s) {
      const auto& a = psi[i].block[s];
      const double w = a.cwiseProduct(left[i] * a * right[i + 1].transpose()).sum();
      v += s == 0 ? w : -w;
    }
    out[i] = v / nrm2;
  }
  return out;
}

double expect_sz(const MatrixProductState& psi, int site) {
  if (site < 0 || site >= psi.size())
    throw std::invalid_argument("site " + std::to_string(site) + " outside the MPS");
  return expect_sz_all(psi)[site];
}

void write_mps(const MatrixProductState& psi, std::ostream& out) {
  out << "qwa-mps 1\n";
  out << "sites " << psi.size() << "\n";
  out << "center " << (psi.center() ? std::to_string(*psi.center()) : std::string("none")) << "\n";
  for (int i = 0; i < psi.size(); ++i) {
    out << "tensor " << i << " " << psi[i].left_dim() << " " << psi[i].right_dim() << "\n";
    for (const auto& b : psi[i].block) {
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        for (Eigen::Index c = 0; c < b.cols(); ++c) out << (c ? " " : "") << format_exact(b(r, c));
        out << "\n";
      }
    }
  }
  out << "end\n";
}

MatrixProductState read_mps(std::istream& in) {
  auto expect = [&](const std::string& want) {
    std::string tok;
    if (!(in >> tok) || tok != want)
      throw std::runtime_error("MPS checkpoint: expected '" + want + "', got '" + tok + "'");
  };
  expect("qwa-mps");
  expect("1");
  expect("sites");
  int n = 0;
  if (!(in >> n) || n < 1) throw std::runtime_error("MPS checkpoint: bad site count");
  expect("center");
  std::string c;
  in >> c;
  std::optional<int> center;
  if (c != "none") center = std::stoi(c);
  std::vector<SiteTensor> sites;
  for (int i = 0; i < n; ++i) {
    expect("tensor");
    int idx = 0, l = 0, r = 0;
    if (!(in >> idx >> l >> r) || idx != i || l < 1 || r < 1)
      throw std::runtime_error("MPS checkpoint: bad tensor header at site " + std::to_string(i));
    SiteTensor t(l, r);
    for (auto& b : t.block)
      for (int row = 0; row < l; ++row)
        for (int col = 0; col < r; ++col) {
          std::string tok;
          if (!(in >> tok)) throw std::runtime_error("MPS checkpoint: truncated tensor data");
          b(row, col) = parse_exact(tok);
        }
    sites.push_back(std::move(t));
  }
  expect("end");
  return MatrixProductState(std::move(sites), center);
}

}  // namespace qwa
