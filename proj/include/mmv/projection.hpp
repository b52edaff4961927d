#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmv/types.hpp"

namespace mmv {

// Euclidean projection onto Q = {alpha : ||Phi alpha - B||_F <= eps}.
//
// For q outside Q the KKT conditions give
//   alpha(lambda) = q - lambda Phi^T r(lambda),
//   r(lambda)     = (I + lambda Phi Phi^T)^{-1} (Phi q - B),
// with lambda >= 0 chosen so that ||r(lambda)||_F = eps. If Phi Phi^T = c I
// this is explicit. Otherwise Phi Phi^T = U diag(d) U^T is factored once and
// each projection solves the scalar secular equation in lambda.
class FeasibleSetProjector {
public:
  explicit FeasibleSetProjector(const MmvProblem& problem)
      : phi_(problem.phi()), b_(problem.B()), eps_(problem.epsilon()) {
    const auto& a = problem.measurement();
    if (a.row_orthonormal()) {
      // Psi orthonormal and square keeps Phi Phi^T = A A^T.
      scale_ = *a.scale();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(phi_ * phi_.transpose());
    if (eig.info() != Eigen::Success) throw DegenerateInput("eigendecomposition of Phi Phi^T failed");
    u_ = eig.eigenvectors();
    d_ = eig.eigenvalues().cwiseMax(0.0);
    const double dmax = d_.size() ? d_.maxCoeff() : 0.0;
    if (dmax <= 0.0) throw InvalidArgument("dictionary Phi is zero");
    zero_tol_ = 1e-12 * dmax;
    phi_u_ = phi_.transpose() * u_;
  }

  bool closed_form() const { return scale_ > 0.0; }
  double epsilon() const { return eps_; }
  const Matrix& phi() const { return phi_; }
  const Matrix& data() const { return b_; }

  double residual_norm(const Matrix& alpha) const { return (phi_ * alpha - b_).norm(); }

  bool feasible(const Matrix& alpha) const { return residual_norm(alpha) <= eps_; }

  Matrix project(const Matrix& q) const {
    Matrix r0 = phi_ * q - b_;
    const double nr = r0.norm();
    if (nr <= eps_) return q;
    if (closed_form()) {
      const double shrink = eps_ > 0.0 ? 1.0 - eps_ / nr : 1.0;
      return q - (shrink / scale_) * (phi_.transpose() * r0);
    }
    return project_general(q, r0);
  }

private:
  Matrix project_general(const Matrix& q, const Matrix& r0) const {
    const Matrix w = u_.transpose() * r0;  // n x L, coordinates in the eigenbasis
    const Vector c = w.rowwise().squaredNorm();

    double floor2 = 0.0;   // part of the residual no lambda can remove
    double range2 = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
      if (d_(i) <= zero_tol_) {
        floor2 += c(i);
      } else {
        range2 += c(i);
        dmin = std::min(dmin, d_(i));
      }
    }
    const double slack = 1e-9 * std::max(1.0, b_.norm());
    if (std::sqrt(floor2) > eps_ + slack)
      throw InfeasibleProblem("projection: data is not reachable within epsilon");

    const double target2 = eps_ * eps_ - floor2;
    if (target2 <= 0.0 || range2 == 0.0) {
      // lambda -> infinity: remove the full range component.
      Vector inv = Vector::Zero(d_.size());
      for (Eigen::Index i = 0; i < d_.size(); ++i)
        if (d_(i) > zero_tol_) inv(i) = 1.0 / d_(i);
      return q - phi_u_ * (inv.asDiagonal() * w);
    }

    const double lambda = solve_secular(c, floor2, target2 + floor2, std::sqrt(range2), dmin);
    const Vector scale = (1.0 + lambda * d_.array()).inverse().matrix();
    return q - lambda * (phi_u_ * (scale.asDiagonal() * w));
  }

  // ||r(lambda)||^2 = sum_i c_i / (1 + lambda d_i)^2 (null part constant).
  double residual2(const Vector& c, double floor2, double lambda, double* deriv) const {
    double s = floor2, ds = 0.0;
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
      if (d_(i) <= zero_tol_) continue;
      const double t = 1.0 / (1.0 + lambda * d_(i));
      s += c(i) * t * t;
      ds -= 2.0 * c(i) * d_(i) * t * t * t;
    }
    if (deriv) *deriv = ds;
    return s;
  }

  // Newton on phi(lambda) = 1/||r|| - 1/eps, safeguarded by bisection.
  double solve_secular(const Vector& c, double floor2, double eps2, double range_norm,
                       double dmin) const {
    const double eps = std::sqrt(eps2);
    double lo = 0.0;
    double hi = (range_norm / std::sqrt(eps2 - floor2) - 1.0) / dmin;
    hi = std::max(hi, 0.0) * (1.0 + 1e-12) + std::numeric_limits<double>::min();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      double ds = 0.0;
      const double s = residual2(c, floor2, lambda, &ds);
      const double rn = std::sqrt(s);
      if (std::abs(rn - eps) <= 1e-14 * eps) return lambda;
      if (rn > eps)
        lo = lambda;
      else
        hi = lambda;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
      const double phi = 1.0 / rn - 1.0 / eps;
      const double dphi = -0.5 * ds / (s * rn);
      double next = dphi > 0.0 ? lambda - phi / dphi : 0.5 * (lo + hi);
      if (next == lambda) return lambda;  // Newton has stalled at the root
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      lambda = next;
    }
    // Bracket collapsed: take the feasible end.
    return hi;
  }

  Matrix phi_;
  Matrix b_;
  double eps_ = 0.0;
  double scale_ = 0.0;  // c in Phi Phi^T = c I, or 0
  Matrix u_;
  Vector d_;
  Matrix phi_u_;  // Phi^T U
  double zero_tol_ = 0.0;
};

inline Matrix project_feasible(const Matrix& q, const MmvProblem& problem) {
  return FeasibleSetProjector(problem).project(q);
}

}  // namespace mmv
