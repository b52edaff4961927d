#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmv/error.hpp"

namespace mmv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// N x L signal/coefficient block. Rows are the jointly sparse unit.
using CoefficientMatrix = Matrix;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_coefficients(const Matrix& x, const char* name = "coefficient matrix") {
  detail::require(x.rows() >= 1 && x.cols() >= 1, std::string(name) + " must be non-empty");
  detail::require(all_finite(x), std::string(name) + " has non-finite entries");
}

// Strictly increasing list of row indices.
class SupportSet {
public:
  SupportSet() = default;

  // Sorts and deduplicates.
  explicit SupportSet(std::vector<std::size_t> idx) : indices_(std::move(idx)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }
  SupportSet(std::initializer_list<std::size_t> idx)
      : SupportSet(std::vector<std::size_t>(idx)) {}

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool contains(std::size_t j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
  }

  // Every index below n.
  bool fits(std::size_t n) const { return indices_.empty() || indices_.back() < n; }

  // Membership mask of length n.
  std::vector<bool> mask(std::size_t n) const {
    std::vector<bool> m(n, false);
    for (auto j : indices_)
      if (j < n) m[j] = true;
    return m;
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
  std::vector<std::size_t> indices_;
};

inline std::string to_string(const SupportSet& s) {
  std::string out;
  for (auto j : s) {
    if (!out.empty()) out += ' ';
    out += std::to_string(j);
  }
  return out;
}

// Measurement matrix A (n x N) with an optional certificate that
// A A^T = c I.
class MeasurementMatrix {
public:
  static constexpr double kCertifyTol = 1e-10;

  MeasurementMatrix() = default;

  // Certifies row orthogonality on construction.
  explicit MeasurementMatrix(Matrix a) : a_(std::move(a)) {
    detail::require(a_.rows() >= 1 && a_.cols() >= 1, "measurement matrix must be non-empty");
    detail::require(all_finite(a_), "measurement matrix has non-finite entries");
    certify();
  }

  const Matrix& matrix() const { return a_; }
  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }

  bool row_orthonormal() const { return scale_.has_value(); }
  // c in A A^T = c I, when certified.
  std::optional<double> scale() const { return scale_; }

  // n > N: outside the underdetermined regime the solvers target.
  bool overdetermined() const { return a_.rows() > a_.cols(); }

private:
  void certify() {
    const Matrix gram = a_ * a_.transpose();
    const double c = gram.diagonal().mean();
    if (c <= 0.0) return;
    const Matrix dev = gram - c * Matrix::Identity(gram.rows(), gram.cols());
    if (dev.cwiseAbs().maxCoeff() <= kCertifyTol * c) scale_ = c;
  }

  Matrix a_;
  std::optional<double> scale_;
};

// min ||alpha||_{1,2} s.t. ||A Psi alpha - B||_F <= epsilon.
class MmvProblem {
public:
  MmvProblem(MeasurementMatrix a, Matrix b, double epsilon, std::optional<Matrix> psi = std::nullopt)
      : a_(std::move(a)), b_(std::move(b)), epsilon_(epsilon), psi_(std::move(psi)) {
    detail::require(b_.rows() == a_.rows(), "B must have as many rows as A");
    detail::require(b_.cols() >= 1, "B must have at least one column");
    detail::require(all_finite(b_), "B has non-finite entries");
    detail::require(epsilon_ >= 0.0 && std::isfinite(epsilon_), "epsilon must be finite and >= 0");
    if (psi_) {
      const auto big_n = a_.cols();
      detail::require(psi_->rows() == big_n && psi_->cols() == big_n, "Psi must be N x N");
      const Matrix dev = psi_->transpose() * *psi_ - Matrix::Identity(big_n, big_n);
      detail::require(dev.cwiseAbs().maxCoeff() <= 1e-10, "Psi must be orthonormal");
      phi_ = a_.matrix() * *psi_;
    } else {
      phi_ = a_.matrix();
    }
  }

  MmvProblem(Matrix a, Matrix b, double epsilon)
      : MmvProblem(MeasurementMatrix(std::move(a)), std::move(b), epsilon) {}

  const MeasurementMatrix& measurement() const { return a_; }
  const Matrix& A() const { return a_.matrix(); }
  const Matrix& B() const { return b_; }
  double epsilon() const { return epsilon_; }
  const std::optional<Matrix>& psi() const { return psi_; }

  // Effective dictionary Phi = A Psi.
  const Matrix& phi() const { return phi_; }

  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index signal_dim() const { return a_.cols(); }
  Eigen::Index channels() const { return b_.cols(); }

  // Maps coefficients back to the signal domain, X = Psi alpha.
  Matrix synthesize(const Matrix& alpha) const { return psi_ ? Matrix(*psi_ * alpha) : alpha; }

  // Same dictionary, different data block (used for per-column solves).
  MmvProblem with_data(Matrix b, double epsilon) const {
    MmvProblem p = *this;
    detail::require(b.rows() == b_.rows(), "B must have as many rows as A");
    p.b_ = std::move(b);
    p.epsilon_ = epsilon;
    return p;
  }

private:
  MeasurementMatrix a_;
  Matrix b_;
  double epsilon_ = 0.0;
  std::optional<Matrix> psi_;
  Matrix phi_;
};

}  // namespace mmv
