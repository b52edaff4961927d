#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "mmv/core.hpp"
#include "mmv/music.hpp"
#include "mmv/projection.hpp"
#include "mmv/report.hpp"
#include "mmv/smoothing.hpp"

namespace mmv {

struct NestaConfig {
  double mu_final = 0.0;          // <= 0 selects 1e-4 * max_j ||(Phi^T B)(j,:)||_2
  long continuation_stages = 4;
  double mu0_factor = 0.9;        // mu_0 = factor * max_j ||(Phi^T B)(j,:)||_2
  long max_inner_iters = 5000;
  long stop_window = 10;
  double stop_tol = 1e-7;
  double support_tol = 1e-3;      // detected support: rows above tol * largest row

  void validate() const {
    detail::require(continuation_stages >= 1, "continuation_stages must be >= 1");
    detail::require(max_inner_iters >= 1, "max_inner_iters must be >= 1");
    detail::require(stop_window >= 2, "stop_window must be >= 2");
    detail::require(stop_tol > 0.0, "stop_tol must be positive");
    detail::require(mu0_factor > 0.0, "mu0_factor must be positive");
    detail::require(std::isfinite(mu_final), "mu_final must be finite");
  }
};

// Weight of the k-th gradient in the accumulated model, (k + 1) / 2.
inline double nesta_weight(long k) { return 0.5 * static_cast<double>(k + 1); }

// Mixing coefficient between z_k and y_k, 2 / (k + 3).
inline double nesta_tau(long k) { return 2.0 / static_cast<double>(k + 3); }

struct NestaState {
  long k = 0;
  Matrix alpha;        // alpha_k, point where the next gradient is taken
  Matrix y;            // y_k (feasible)
  Matrix z;            // z_k (feasible)
  Matrix grad_accum;   // sum_{i <= k} a_i grad f(alpha_i)
  Matrix prox_center;  // alpha_0 of p_p(alpha) = 1/2 ||alpha - alpha_0||^2
  std::vector<double> objective_trace;  // f_mu(y_k)

  // Fresh state anchored at a feasible point.
  static NestaState start(const Matrix& alpha0) {
    NestaState s;
    s.alpha = alpha0;
    s.y = alpha0;
    s.z = alpha0;
    s.prox_center = alpha0;
    s.grad_accum = Matrix::Zero(alpha0.rows(), alpha0.cols());
    return s;
  }
};

// One accelerated iteration with L = 1/mu:
//   y_k     = P(alpha_k - grad / L)
//   z_k     = P(alpha_0 - sum_i a_i grad_i / L)
//   alpha   = tau_k z_k + (1 - tau_k) y_k
inline void nesta_step(NestaState& s, const FeasibleSetProjector& proj, const SmoothingConfig& smoothing) {
  const double inv_l = smoothing.mu;
  const auto mask = smoothing.known_support.mask(static_cast<std::size_t>(s.alpha.rows()));
  Matrix grad;
  smoothed_gradient_into(s.alpha, smoothing, mask, grad);

  s.y = proj.project(s.alpha - inv_l * grad);
  s.grad_accum += nesta_weight(s.k) * grad;
  s.z = proj.project(s.prox_center - inv_l * s.grad_accum);

  const double tau = nesta_tau(s.k);
  s.alpha = tau * s.z + (1.0 - tau) * s.y;
  ++s.k;
  s.objective_trace.push_back(smoothed_objective(s.y, smoothing));
}

inline NestaState nesta_step(const NestaState& state, const MmvProblem& problem,
                             const SmoothingConfig& smoothing) {
  smoothing.validate();
  detail::require(state.alpha.rows() == problem.signal_dim() && state.alpha.cols() == problem.channels(),
                  "NESTA state does not match problem dimensions");
  NestaState next = state;
  nesta_step(next, FeasibleSetProjector(problem), smoothing);
  return next;
}

// Relative variation of the newest objective value against the mean of the
// previous `window` values. `floor` bounds the denominator from below so that
// objectives driven to zero (fully known support) still terminate.
inline bool objective_settled(const std::vector<double>& trace, long window, double tol,
                              double floor = 0.0) {
  const auto w = static_cast<std::size_t>(window);
  if (trace.size() <= w) return false;
  double mean = 0.0;
  for (std::size_t i = trace.size() - 1 - w; i + 1 < trace.size(); ++i) mean += trace[i];
  mean /= static_cast<double>(w);
  const double last = trace.back();
  const double denom = std::max(mean, floor);
  if (denom == 0.0) return last == 0.0;
  return std::abs(last - mean) / denom < tol;
}

// Continuation values mu_1 > ... > mu_S = mu_final (a single stage when
// mu_final is not below mu_0).
inline std::vector<double> continuation_schedule(double mu0, double mu_final, long stages) {
  if (!(mu0 > mu_final)) return {mu_final};
  const double ratio = std::pow(mu_final / mu0, 1.0 / static_cast<double>(stages));
  std::vector<double> mus;
  double mu = mu0;
  for (long t = 1; t < stages; ++t) {
    mu *= ratio;
    mus.push_back(mu);
  }
  mus.push_back(mu_final);
  return mus;
}

namespace detail {

inline double unsmoothed_objective(const Matrix& alpha, const SmoothingConfig& cfg) {
  const auto mask = cfg.known_support.mask(static_cast<std::size_t>(alpha.rows()));
  double f = 0.0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    if (mask[static_cast<std::size_t>(j)]) continue;
    f += cfg.aggregator == Aggregator::RowL2 ? alpha.row(j).norm() : alpha.row(j).cwiseAbs().sum();
  }
  return f;
}

inline SupportSet relative_support(const Matrix& x, double rel_tol) {
  const double top = x.rows() ? x.rowwise().norm().maxCoeff() : 0.0;
  return row_support(x, rel_tol * top);
}

}  // namespace detail

inline RecoveryReport nesta_solve(const MmvProblem& problem, const SmoothingConfig& smoothing,
                                  const NestaConfig& cfg) {
  cfg.validate();
  detail::require(smoothing.known_support.fits(static_cast<std::size_t>(problem.signal_dim())),
                  "known support index out of range");
  const auto t0 = std::chrono::steady_clock::now();

  const FeasibleSetProjector proj(problem);
  const double scale = (problem.phi().transpose() * problem.B()).rowwise().norm().maxCoeff();
  // Objective values below this are indistinguishable from zero.
  const double objective_floor = 1e-6 * scale;
  double mu_final = cfg.mu_final > 0.0 ? cfg.mu_final : 1e-4 * scale;
  if (!(mu_final > 0.0)) mu_final = 1.0;  // zero data: any smoothing level works
  const auto schedule = continuation_schedule(cfg.mu0_factor * scale, mu_final, cfg.continuation_stages);

  RecoveryReport rep;
  rep.converged = true;
  Matrix x = proj.project(Matrix::Zero(problem.signal_dim(), problem.channels()));
  SmoothingConfig stage = smoothing;
  for (double mu : schedule) {
    stage.mu = mu;
    NestaState s = NestaState::start(x);
    bool settled = false;
    while (s.k < cfg.max_inner_iters) {
      nesta_step(s, proj, stage);
      if (objective_settled(s.objective_trace, cfg.stop_window, cfg.stop_tol, objective_floor)) {
        settled = true;
        break;
      }
    }
    rep.converged = rep.converged && settled;
    rep.inner_iterations += s.k;
    rep.objective_trace.insert(rep.objective_trace.end(), s.objective_trace.begin(), s.objective_trace.end());
    x = std::move(s.y);
  }

  rep.coefficients = x;
  rep.estimate = problem.synthesize(x);
  rep.final_residual = proj.residual_norm(x);
  rep.final_objective = detail::unsmoothed_objective(x, smoothing);
  rep.detected_support = detail::relative_support(x, cfg.support_tol);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

enum class ThresholdMode {
  KeepLargest,      // H_k: the k rows with largest l2 norm
  MagnitudeCutoff,  // rows above cutoff_fraction * largest row norm
};

struct IterativeNestaConfig {
  long k = 1;
  bool use_music = false;
  long max_outer = 5;
  ThresholdMode mode = ThresholdMode::KeepLargest;
  double cutoff_fraction = 0.1;
  double music_delta = 1e-8;
};

// Alternates masked NESTA solves with support re-estimation until the
// thresholded support repeats or max_outer passes have run.
inline RecoveryReport iterative_nesta(const MmvProblem& problem, const SmoothingConfig& smoothing,
                                      const NestaConfig& cfg, const IterativeNestaConfig& it) {
  const long big_n = problem.signal_dim();
  detail::require(it.k >= 1 && it.k < big_n, "iterative NESTA needs 1 <= k < N");
  detail::require(it.max_outer >= 1, "max_outer must be >= 1");
  detail::require(it.cutoff_fraction > 0.0 && it.cutoff_fraction < 1.0, "cutoff_fraction must lie in (0, 1)");
  const auto t0 = std::chrono::steady_clock::now();

  SupportSet known = smoothing.known_support;
  if (it.use_music) {
    const MusicResult music = music_support(problem, it.k, it.music_delta);
    // Trust only as many columns as the data rank can certify.
    const auto take = static_cast<std::size_t>(std::min(music.rank, it.k));
    known = SupportSet(std::vector<std::size_t>(music.ranking.begin(), music.ranking.begin() + static_cast<long>(take)));
  }

  RecoveryReport rep;
  long inner = 0;
  std::vector<double> trace;
  SmoothingConfig sm = smoothing;
  for (long outer = 1; outer <= it.max_outer; ++outer) {
    sm.known_support = known;
    rep = nesta_solve(problem, sm, cfg);
    inner += rep.inner_iterations;
    trace.insert(trace.end(), rep.objective_trace.begin(), rep.objective_trace.end());

    SupportSet next = it.mode == ThresholdMode::KeepLargest
                          ? hard_threshold_rows(rep.coefficients, it.k).support
                          : detail::relative_support(rep.coefficients, it.cutoff_fraction);
    rep.outer_iterations = outer;
    const bool repeated = next == known;
    rep.detected_support = std::move(next);
    if (repeated) break;
    known = rep.detected_support;
  }
  rep.inner_iterations = inner;
  rep.objective_trace = std::move(trace);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mmv
