#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mmv/types.hpp"

namespace mmv {

// Number of singular values of B above delta * sigma_1 (0 for B = 0).
inline long estimate_rank(const Matrix& b, double delta) {
  detail::require(delta > 0.0 && delta < 1.0, "rank threshold delta must lie in (0, 1)");
  if (b.size() == 0) return 0;
  const Vector s = Eigen::JacobiSVD<Matrix>(b).singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<long>((s.array() > delta * s(0)).count());
}

// Top-r left singular vectors of B.
inline Matrix signal_subspace(const Matrix& b, long r) {
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

// score_j = ||(I - U U^T) phi_j|| / ||phi_j||; columns with phi_j = 0 score 1.
inline Vector music_scores(const MmvProblem& problem, long r) {
  const auto& b = problem.B();
  detail::require(r >= 1 && r <= std::min<long>(b.rows(), b.cols()),
                  "MUSIC subspace dimension r must satisfy 1 <= r <= min(n, L)");
  const Matrix u = signal_subspace(b, r);
  const Matrix& phi = problem.phi();
  Vector scores(phi.cols());
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    const double nrm = phi.col(j).norm();
    if (nrm == 0.0) {
      scores(j) = 1.0;
      continue;
    }
    const Vector resid = phi.col(j) - u * (u.transpose() * phi.col(j));
    scores(j) = std::min(1.0, resid.norm() / nrm);
  }
  return scores;
}

struct MusicResult {
  long rank = 0;
  Vector scores;                      // per column of Phi, in [0, 1]
  SupportSet support;                 // the min(k, N) best-scoring columns
  std::vector<std::size_t> ranking;   // all columns, best score first
  std::vector<std::size_t> zero_columns;
};

// Columns ordered by increasing score; ties by lower index.
inline std::vector<std::size_t> rank_by_score(const Vector& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

inline MusicResult music_support(const MmvProblem& problem, long k, double delta = 1e-8) {
  const long big_n = problem.signal_dim();
  detail::require(k >= 1 && k < big_n, "MUSIC support size k must satisfy 1 <= k < N");
  MusicResult res;
  const Matrix& phi = problem.phi();
  for (Eigen::Index j = 0; j < phi.cols(); ++j)
    if (phi.col(j).norm() == 0.0) res.zero_columns.push_back(static_cast<std::size_t>(j));

  res.rank = estimate_rank(problem.B(), delta);
  if (res.rank == 0) {
    // No signal subspace: nothing can be detected.
    res.scores = Vector::Ones(big_n);
    res.ranking = rank_by_score(res.scores);
    return res;
  }
  res.scores = music_scores(problem, res.rank);
  res.ranking = rank_by_score(res.scores);
  const auto take = static_cast<std::size_t>(std::min(k, big_n));
  res.support = SupportSet(std::vector<std::size_t>(res.ranking.begin(), res.ranking.begin() + static_cast<long>(take)));
  return res;
}

}  // namespace mmv
