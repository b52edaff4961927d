#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "mmv/types.hpp"

namespace mmv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline void require_order(double q) {
  require(q == 1.0 || q == 2.0 || q == kInf, "norm order must be 1, 2 or infinity");
}

}  // namespace detail

// Per-row l_q norms, q in {1, 2, inf}.
inline Vector row_norms(const Matrix& x, double q) {
  detail::require_order(q);
  if (q == 1.0) return x.cwiseAbs().rowwise().sum();
  if (q == 2.0) return x.rowwise().norm();
  return x.cwiseAbs().rowwise().maxCoeff();
}

// l_p norm of the vector of row l_q norms; p in {1, 2}.
inline double mixed_norm(const Matrix& x, double p, double q) {
  detail::require(p == 1.0 || p == 2.0, "outer norm order must be 1 or 2");
  const Vector r = row_norms(x, q);
  return p == 1.0 ? r.sum() : r.norm();
}

// Indices of rows sorted by decreasing l2 norm; ties keep the lower index first.
inline std::vector<std::size_t> rows_by_energy(const Matrix& x) {
  const Vector norms = x.rowwise().squaredNorm();
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms(a) > norms(b); });
  return order;
}

struct Thresholded {
  Matrix matrix;
  SupportSet support;
};

// H_k: keep the k rows with the largest l2 norm, zero the rest.
inline Thresholded hard_threshold_rows(const Matrix& x, long k) {
  detail::require(k >= 1, "hard threshold level k must be >= 1");
  const auto rows = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(k) >= rows) {
    std::vector<std::size_t> all(rows);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return {x, SupportSet(std::move(all))};
  }
  auto order = rows_by_energy(x);
  order.resize(static_cast<std::size_t>(k));
  SupportSet kept(std::move(order));
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (auto j : kept) out.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(j));
  return {std::move(out), std::move(kept)};
}

// Rows whose l2 norm exceeds tol.
inline SupportSet row_support(const Matrix& x, double tol) {
  detail::require(tol >= 0.0, "support tolerance must be >= 0");
  std::vector<std::size_t> idx;
  const Vector norms = x.rowwise().norm();
  for (Eigen::Index j = 0; j < norms.size(); ++j)
    if (norms(j) > tol) idx.push_back(static_cast<std::size_t>(j));
  return SupportSet(std::move(idx));
}

inline Matrix select_columns(const Matrix& a, const std::vector<std::size_t>& cols) {
  Matrix out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = a.col(static_cast<Eigen::Index>(cols[i]));
  return out;
}

// Numerical rank: singular values above rel_tol * sigma_max.
inline Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

inline constexpr long kSparkMaxColumns = 20;

// Numerical spark by exhaustive search over column subsets, smallest first.
// Returns N + 1 when all columns are independent. Refuses N > 20.
inline long spark(const MeasurementMatrix& a, double rank_tol = 1e-10) {
  const Matrix& m = a.matrix();
  const long big_n = m.cols();
  if (big_n > kSparkMaxColumns)
    throw SizeLimit("spark: brute force refused for N = " + std::to_string(big_n) + " > 20");
  detail::require(rank_tol >= 0.0, "rank tolerance must be >= 0");
  const long n = m.rows();

  for (long s = 1; s <= big_n; ++s) {
    // Any n + 1 columns of an n-row matrix are dependent.
    if (s > n) return s;
    std::vector<std::size_t> idx(static_cast<std::size_t>(s));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      if (numerical_rank(select_columns(m, idx), rank_tol) < s) return s;
      // next combination in lexicographic order
      long i = s - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] ==
                           static_cast<std::size_t>(big_n - s + i))
        --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (long j = i + 1; j < s; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return big_n + 1;
}

struct RowOrthonormalization {
  MeasurementMatrix matrix;  // T A, with (T A)(T A)^T = I
  Matrix transform;          // T (n x n); co-transform any data block as T B
};

// Gram-Schmidt of the rows via QR of A^T, signs fixed so that diag(R) > 0.
inline RowOrthonormalization row_orthonormalize_with_transform(const MeasurementMatrix& a) {
  const Matrix& m = a.matrix();
  const auto n = m.rows();
  detail::require(n <= m.cols(), "row_orthonormalize needs n <= N");
  if (numerical_rank(m, 1e-12) < n)
    throw DegenerateInput("row_orthonormalize: A does not have full row rank");

  Eigen::HouseholderQR<Matrix> qr(m.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(m.cols(), n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      q.col(i) *= -1.0;
      r.row(i) *= -1.0;
    }
  }
  // A^T = Q R  =>  Q^T = R^{-T} A.
  Matrix t = r.transpose().triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  return {MeasurementMatrix(q.transpose()), std::move(t)};
}

inline MeasurementMatrix row_orthonormalize(const MeasurementMatrix& a) {
  return row_orthonormalize_with_transform(a).matrix;
}

}  // namespace mmv
