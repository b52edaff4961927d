#pragma once

#include <chrono>
#include <cmath>

#include "mmv/core.hpp"
#include "mmv/report.hpp"

namespace mmv {

// ||Phi||_2 by power iteration on Phi^T Phi from a fixed start vector.
inline double spectral_norm(const Matrix& phi, int max_iters = 50, double rel_tol = 1e-10) {
  if (phi.size() == 0) return 0.0;
  Vector v = Vector::Ones(phi.cols()) / std::sqrt(static_cast<double>(phi.cols()));
  double est = 0.0;
  for (int i = 0; i < max_iters; ++i) {
    Vector w = phi.transpose() * (phi * v);
    const double nw = w.norm();
    if (nw == 0.0) {
      // start vector in the null space; restart from a basis vector
      v = Vector::Unit(phi.cols(), i % phi.cols());
      continue;
    }
    const double next = std::sqrt(nw);
    v = w / nw;
    const bool done = est > 0.0 && std::abs(next - est) <= rel_tol * next;
    est = next;
    if (done) break;
  }
  return est;
}

struct IhtConfig {
  long k = 1;
  double step = 0.0;  // <= 0 selects 0.98 / ||Phi||_2^2
  long max_iters = 2000;
  double stop_tol = 1e-8;
  bool adaptive_step = false;  // normalized IHT with step halving
};

// Iterative hard thresholding on the row-sparse model:
//   a^{n+1} = alpha^n + mu Phi^T (B - Phi alpha^n),  alpha^{n+1} = H_k(a^{n+1}),
// started from alpha^0 = H_k(mu Phi^T B), the first iterate from zero.
inline RecoveryReport iht_solve(const MmvProblem& problem, const IhtConfig& cfg) {
  const long big_n = problem.signal_dim();
  detail::require(cfg.k >= 1 && cfg.k < big_n, "IHT needs 1 <= k < N");
  detail::require(cfg.max_iters >= 1, "IHT max_iters must be >= 1");
  detail::require(cfg.stop_tol > 0.0, "IHT stop_tol must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  const Matrix& phi = problem.phi();
  const Matrix& b = problem.B();
  const double norm = spectral_norm(phi);
  detail::require(norm > 0.0, "IHT: dictionary Phi is zero");
  double step = cfg.step > 0.0 ? cfg.step : 0.98 / (norm * norm);
  if (!cfg.adaptive_step)
    // Equality (e.g. orthonormal columns with unit step) still majorizes.
    detail::require(step * norm * norm <= 1.0 + 1e-12, "IHT step violates step * ||Phi||^2 <= 1");

  RecoveryReport rep;
  auto residual = [&](const Matrix& a) { return (b - phi * a).norm(); };

  Matrix alpha;
  SupportSet support;
  if (cfg.adaptive_step) {
    alpha = Matrix::Zero(big_n, b.cols());
  } else {
    auto h = hard_threshold_rows(step * (phi.transpose() * b), cfg.k);
    alpha = std::move(h.matrix);
    support = std::move(h.support);
  }
  rep.residual_trace.push_back(residual(alpha));

  long iters = 0;
  while (iters < cfg.max_iters) {
    const Matrix grad = phi.transpose() * (b - phi * alpha);
    Thresholded next;
    if (cfg.adaptive_step) {
      // step from the gradient restricted to the current (or prospective) support
      SupportSet probe = support.empty() ? hard_threshold_rows(grad, cfg.k).support : support;
      Matrix g_s = Matrix::Zero(grad.rows(), grad.cols());
      for (auto j : probe) g_s.row(static_cast<Eigen::Index>(j)) = grad.row(static_cast<Eigen::Index>(j));
      const double num = g_s.squaredNorm();
      const double den = (phi * g_s).squaredNorm();
      step = den > 0.0 ? num / den : 1.0 / (norm * norm);
      constexpr double c = 0.01;
      for (int halvings = 0; halvings < 60; ++halvings) {
        next = hard_threshold_rows(alpha + step * grad, cfg.k);
        if (next.support == support) break;
        const Matrix delta = next.matrix - alpha;
        const double dd = (phi * delta).squaredNorm();
        const double omega = dd > 0.0 ? (1.0 - c) * delta.squaredNorm() / dd : step;
        if (step <= omega) break;
        step *= 0.5;
      }
    } else {
      next = hard_threshold_rows(alpha + step * grad, cfg.k);
    }
    ++iters;
    const double change = (next.matrix - alpha).norm() / std::max(1.0, alpha.norm());
    alpha = std::move(next.matrix);
    support = std::move(next.support);
    rep.residual_trace.push_back(residual(alpha));
    if (change < cfg.stop_tol) {
      rep.converged = true;
      break;
    }
  }

  rep.inner_iterations = iters;
  rep.outer_iterations = 1;
  rep.coefficients = alpha;
  rep.estimate = problem.synthesize(alpha);
  rep.final_residual = rep.residual_trace.back();
  rep.final_objective = 0.5 * rep.final_residual * rep.final_residual;
  rep.objective_trace = rep.residual_trace;
  rep.detected_support = row_support(alpha, 0.0);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// Fixed-point test H_k(alpha + mu Phi^T (B - Phi alpha)) == alpha.
inline bool iht_fixed_point(const MmvProblem& problem, const Matrix& alpha, long k, double step,
                            double tol = 1e-8) {
  const Matrix a = alpha + step * (problem.phi().transpose() * (problem.B() - problem.phi() * alpha));
  const Matrix h = hard_threshold_rows(a, k).matrix;
  return (h - alpha).norm() <= tol * std::max(1.0, alpha.norm());
}

}  // namespace mmv
