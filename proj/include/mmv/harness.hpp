#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mmv/csv.hpp"
#include "mmv/iht.hpp"
#include "mmv/kv.hpp"
#include "mmv/nesta.hpp"
#include "mmv/synth.hpp"

namespace mmv {

enum class SolverKind { NestaMmv, IterativeNesta, IhtMmv, NestaSmvPerColumn };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::NestaMmv: return "nesta";
    case SolverKind::IterativeNesta: return "iterative-nesta";
    case SolverKind::IhtMmv: return "iht";
    case SolverKind::NestaSmvPerColumn: return "smv";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& s) {
  if (s == "nesta") return SolverKind::NestaMmv;
  if (s == "iterative-nesta") return SolverKind::IterativeNesta;
  if (s == "iht") return SolverKind::IhtMmv;
  if (s == "smv") return SolverKind::NestaSmvPerColumn;
  throw InvalidArgument("unknown solver: " + s);
}

struct SolverConfig {
  NestaConfig nesta;
  Aggregator aggregator = Aggregator::RowL2;
  long k_threshold = 0;  // <= 0: use the instance's k
  bool use_music = false;
  long max_outer = 5;
  IhtConfig iht;         // k is taken from k_threshold
  std::optional<double> epsilon;  // overrides the instance's epsilon
  double success_threshold = 1e-3;
  double support_tol = 1e-3;      // relative row-norm cutoff for support_exact
};

// Runs one solver on a problem. `k` is the sparsity level handed to
// thresholding solvers.
inline RecoveryReport run_solver(const MmvProblem& problem, SolverKind solver, const SolverConfig& cfg, long k) {
  SmoothingConfig smoothing;
  smoothing.aggregator = cfg.aggregator;
  switch (solver) {
    case SolverKind::NestaMmv:
      return nesta_solve(problem, smoothing, cfg.nesta);
    case SolverKind::IterativeNesta: {
      IterativeNestaConfig it;
      it.k = k;
      it.use_music = cfg.use_music;
      it.max_outer = cfg.max_outer;
      return iterative_nesta(problem, smoothing, cfg.nesta, it);
    }
    case SolverKind::IhtMmv: {
      IhtConfig ic = cfg.iht;
      ic.k = k;
      return iht_solve(problem, ic);
    }
    case SolverKind::NestaSmvPerColumn: {
      // Independent single-vector solves, noise budget split evenly.
      const auto l = problem.channels();
      const double eps_col = problem.epsilon() / std::sqrt(static_cast<double>(l));
      RecoveryReport all;
      all.coefficients = Matrix::Zero(problem.signal_dim(), l);
      all.converged = true;
      const auto t0 = std::chrono::steady_clock::now();
      for (Eigen::Index c = 0; c < l; ++c) {
        const MmvProblem sub = problem.with_data(problem.B().col(c), eps_col);
        RecoveryReport r = nesta_solve(sub, smoothing, cfg.nesta);
        all.coefficients.col(c) = r.coefficients.col(0);
        all.inner_iterations += r.inner_iterations;
        all.converged = all.converged && r.converged;
        all.objective_trace.insert(all.objective_trace.end(), r.objective_trace.begin(), r.objective_trace.end());
      }
      all.estimate = problem.synthesize(all.coefficients);
      all.final_residual = (problem.phi() * all.coefficients - problem.B()).norm();
      all.final_objective = mixed_norm(all.coefficients, 1, 1);
      all.detected_support = detail::relative_support(all.coefficients, cfg.nesta.support_tol);
      all.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return all;
    }
  }
  throw InvalidArgument("unknown solver");
}

struct TrialResult {
  ProblemSpec spec;
  SolverKind solver = SolverKind::NestaMmv;
  double relative_error = 0.0;
  bool support_exact = false;
  long inner_iterations = 0;
  long outer_iterations = 0;
  double wall_time = 0.0;
  bool success = false;
  std::string error;  // non-empty when the solver threw
  double residual = 0.0;
  Matrix estimate;
};

inline double relative_error(const Matrix& estimate, const Matrix& truth) {
  const double denom = truth.norm();
  return denom > 0.0 ? (estimate - truth).norm() / denom : estimate.norm();
}

inline bool support_matches(const Matrix& estimate, const SupportSet& truth, double rel_tol) {
  return detail::relative_support(estimate, rel_tol) == truth;
}

inline TrialResult evaluate_trial(const GroundTruthInstance& inst, SolverKind solver, const SolverConfig& cfg) {
  TrialResult out;
  out.spec = inst.spec;
  out.solver = solver;
  try {
    const MmvProblem problem =
        cfg.epsilon ? inst.problem.with_data(inst.problem.B(), *cfg.epsilon) : inst.problem;
    const long k = cfg.k_threshold > 0 ? cfg.k_threshold : inst.spec.k;
    const RecoveryReport rep = run_solver(problem, solver, cfg, k);
    out.relative_error = relative_error(rep.estimate, inst.x_true);
    out.support_exact = support_matches(rep.estimate, inst.support_true, cfg.support_tol);
    out.inner_iterations = rep.inner_iterations;
    out.outer_iterations = rep.outer_iterations;
    out.wall_time = rep.wall_time;
    out.residual = rep.final_residual;
    out.success = out.relative_error < cfg.success_threshold;
    out.estimate = rep.estimate;
  } catch (const Error& e) {
    out.error = e.what();
    out.relative_error = std::numeric_limits<double>::quiet_NaN();
    out.success = false;
  }
  return out;
}

inline TrialResult run_trial(const ProblemSpec& spec, SolverKind solver, const SolverConfig& cfg) {
  return evaluate_trial(gen_instance(spec), solver, cfg);
}

// ---------------------------------------------------------------------------
// Sweeps

inline const char* kResultHeader =
    "solver,n,N,L,k,rank,noise_sigma,seed,relative_error,support_exact,inner_iters,outer_iters,wall_time_s,success";

struct SweepConfig {
  std::vector<long> grid_k;  // empty: base k only
  std::vector<long> grid_n;  // empty: base n only
  long trials = 1;
  std::vector<SolverKind> solvers{SolverKind::NestaMmv};
  ProblemSpec base;
  SolverConfig solver;
  std::string output;
  unsigned threads = 1;
};

inline SweepConfig sweep_config_from_table(const kv::Table& t) {
  static const std::vector<std::string> known = {
      "grid.k", "grid.n", "trials", "solvers", "n", "N", "L", "k", "rank", "noise_sigma", "noise",
      "matrix_kind", "seed", "success_threshold", "output", "threads", "mu_final", "k_threshold",
      "use_music", "max_outer", "aggregator", "max_inner_iters", "stop_tol", "eps"};
  for (const auto& [key, value] : t)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument("unknown sweep config key: " + key);

  SweepConfig c;
  c.base = spec_from_table(t);
  auto get = [&](const char* key) -> const std::string* {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  };
  if (auto v = get("grid.k"))
    for (const auto& s : kv::to_list(*v)) c.grid_k.push_back(kv::to_long("grid.k", s));
  if (auto v = get("grid.n"))
    for (const auto& s : kv::to_list(*v)) c.grid_n.push_back(kv::to_long("grid.n", s));
  if (auto v = get("trials")) c.trials = kv::to_long("trials", *v);
  if (auto v = get("solvers")) {
    c.solvers.clear();
    for (const auto& s : kv::to_list(*v)) c.solvers.push_back(parse_solver(s));
  }
  if (auto v = get("success_threshold")) c.solver.success_threshold = kv::to_double("success_threshold", *v);
  if (auto v = get("output")) c.output = *v;
  if (auto v = get("threads")) c.threads = static_cast<unsigned>(kv::to_long("threads", *v));
  if (auto v = get("mu_final")) c.solver.nesta.mu_final = kv::to_double("mu_final", *v);
  if (auto v = get("k_threshold")) c.solver.k_threshold = kv::to_long("k_threshold", *v);
  if (auto v = get("use_music")) c.solver.use_music = kv::to_bool("use_music", *v);
  if (auto v = get("max_outer")) c.solver.max_outer = kv::to_long("max_outer", *v);
  if (auto v = get("aggregator")) c.solver.aggregator = parse_aggregator(*v);
  if (auto v = get("max_inner_iters")) c.solver.nesta.max_inner_iters = kv::to_long("max_inner_iters", *v);
  if (auto v = get("stop_tol")) c.solver.nesta.stop_tol = kv::to_double("stop_tol", *v);
  if (auto v = get("eps")) c.solver.epsilon = kv::to_double("eps", *v);

  detail::require(c.trials >= 1, "trials must be >= 1");
  detail::require(!c.solvers.empty(), "at least one solver is required");
  detail::require(c.solver.success_threshold > 0.0, "success_threshold must be positive");
  detail::require(c.threads >= 1, "threads must be >= 1");
  return c;
}

struct SweepCell {
  long k = 0;
  long n = 0;
};

inline std::vector<SweepCell> sweep_cells(const SweepConfig& c) {
  const std::vector<long> ks = c.grid_k.empty() ? std::vector<long>{c.base.k} : c.grid_k;
  const std::vector<long> ns = c.grid_n.empty() ? std::vector<long>{c.base.n} : c.grid_n;
  std::vector<SweepCell> cells;
  for (long k : ks)
    for (long n : ns) cells.push_back({k, n});
  return cells;
}

// Spec of trial `t` in a cell: seed = base seed + t, so every solver and
// every cell sees the same seed sequence.
inline ProblemSpec trial_spec(const SweepConfig& c, const SweepCell& cell, long t) {
  ProblemSpec s = c.base;
  s.k = cell.k;
  s.n = cell.n;
  s.rank = std::min({c.base.rank, cell.k, c.base.L});
  s.seed = c.base.seed + static_cast<std::uint64_t>(t);
  return s;
}

inline std::string format_trial_row(const TrialResult& r) {
  std::string line = to_string(r.solver);
  auto add = [&](const std::string& v) {
    line += ',';
    line += v;
  };
  add(std::to_string(r.spec.n));
  add(std::to_string(r.spec.N));
  add(std::to_string(r.spec.L));
  add(std::to_string(r.spec.k));
  add(std::to_string(r.spec.rank));
  add(csv::format_real(r.spec.noise_sigma));
  add(std::to_string(r.spec.seed));
  add(csv::format_real(r.relative_error));
  add(r.support_exact ? "1" : "0");
  add(std::to_string(r.inner_iterations));
  add(std::to_string(r.outer_iterations));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", r.wall_time);
  add(buf);
  add(r.success ? "1" : "0");
  return line;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct CellAggregate {
  double success_rate = 0.0;
  double support_rate = 0.0;
  double median_error = 0.0;
  double median_inner = 0.0;
  double median_outer = 0.0;
  double total_time = 0.0;
};

inline CellAggregate aggregate(const std::vector<TrialResult>& rows) {
  CellAggregate a;
  std::vector<double> err, inner, outer;
  for (const auto& r : rows) {
    a.success_rate += r.success ? 1.0 : 0.0;
    a.support_rate += r.support_exact ? 1.0 : 0.0;
    a.total_time += r.wall_time;
    err.push_back(std::isnan(r.relative_error) ? std::numeric_limits<double>::infinity() : r.relative_error);
    inner.push_back(static_cast<double>(r.inner_iterations));
    outer.push_back(static_cast<double>(r.outer_iterations));
  }
  const auto count = static_cast<double>(rows.size());
  if (count > 0) {
    a.success_rate /= count;
    a.support_rate /= count;
  }
  a.median_error = median(err);
  a.median_inner = median(inner);
  a.median_outer = median(outer);
  return a;
}

// Aggregate rows reuse the result schema: seed = "aggregate",
// relative_error = median, support_exact = exact-support rate,
// inner/outer = medians, wall_time_s = total, success = success rate.
inline std::string format_aggregate_row(SolverKind solver, const ProblemSpec& spec, const CellAggregate& a) {
  std::string line = to_string(solver);
  auto add = [&](const std::string& v) {
    line += ',';
    line += v;
  };
  add(std::to_string(spec.n));
  add(std::to_string(spec.N));
  add(std::to_string(spec.L));
  add(std::to_string(spec.k));
  add(std::to_string(spec.rank));
  add(csv::format_real(spec.noise_sigma));
  add("aggregate");
  add(csv::format_real(a.median_error));
  add(csv::format_real(a.support_rate));
  add(csv::format_real(a.median_inner));
  add(csv::format_real(a.median_outer));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", a.total_time);
  add(buf);
  add(csv::format_real(a.success_rate));
  return line;
}

struct SweepResult {
  std::vector<TrialResult> trials;  // ordered by (cell, solver, trial)
  struct Cell {
    SweepCell cell;
    SolverKind solver;
    CellAggregate aggregate;
  };
  std::vector<Cell> cells;
};

// Runs fn(i) for i in [0, count) on `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(threads, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

// Writes the header comment, the column header, then per (cell, solver)
// the trial rows followed by one aggregate row. The output file is opened
// before any trial runs.
inline SweepResult run_sweep(const SweepConfig& c, std::ostream* progress = nullptr) {
  std::ofstream out;
  if (!c.output.empty()) {
    out.open(c.output, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open sweep output: " + c.output);
  }
  const auto cells = sweep_cells(c);
  for (const auto& cell : cells) {
    ProblemSpec probe = c.base;
    probe.k = cell.k;
    probe.n = cell.n;
    probe.rank = std::min({c.base.rank, cell.k, c.base.L});
    probe.validate();
  }

  struct Job {
    std::size_t cell;
    SolverKind solver;
    long trial;
  };
  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    for (auto s : c.solvers)
      for (long t = 0; t < c.trials; ++t) jobs.push_back({ci, s, t});

  SweepResult res;
  res.trials.resize(jobs.size());
  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    const auto& j = jobs[i];
    res.trials[i] = run_trial(trial_spec(c, cells[j.cell], j.trial), j.solver, c.solver);
    res.trials[i].estimate.resize(0, 0);
  });

  if (out.is_open()) {
    out << "# success_threshold=" << csv::format_real(c.solver.success_threshold) << '\n';
    out << kResultHeader << '\n';
  }
  std::size_t i = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (auto s : c.solvers) {
      std::vector<TrialResult> rows(res.trials.begin() + static_cast<long>(i),
                                    res.trials.begin() + static_cast<long>(i) + c.trials);
      i += static_cast<std::size_t>(c.trials);
      const auto agg = aggregate(rows);
      res.cells.push_back({cells[ci], s, agg});
      if (out.is_open()) {
        for (const auto& r : rows) out << format_trial_row(r) << '\n';
        out << format_aggregate_row(s, trial_spec(c, cells[ci], 0), agg) << '\n';
      }
      if (progress)
        *progress << to_string(s) << " k=" << cells[ci].k << " n=" << cells[ci].n
                  << " success_rate=" << agg.success_rate << '\n';
    }
  }
  if (out.is_open() && !out.flush()) throw IoError("write failed: " + c.output);
  return res;
}

}  // namespace mmv
