// Command-line front end: single recoveries, sweeps, spark and MUSIC.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mmv/mmv.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalid = 2, kDegenerate = 3, kIo = 4 };

struct SolveArgs {
  std::string spec_file;
  std::optional<long> n, big_n, l, k, rank;
  std::optional<double> noise;
  std::optional<std::uint64_t> seed;
  std::string matrix_kind;
  std::string matrix_file, data_file;
  std::string solver = "nesta";
  std::optional<double> eps;
  double mu_final = 0.0;
  long k_threshold = 0;
  bool use_music = false;
  long max_outer = 5;
  std::string aggregator = "row-l2";
  std::string dump_estimate;
};

std::string summary_line(const std::string& solver, std::optional<double> rel_err, const mmv::RecoveryReport& r) {
  std::string line = "solver=" + solver;
  if (rel_err) line += " relative_error=" + mmv::csv::format_real(*rel_err);
  line += " residual=" + mmv::csv::format_real(r.final_residual);
  line += " inner_iters=" + std::to_string(r.inner_iterations);
  line += " outer_iters=" + std::to_string(r.outer_iterations);
  line += " converged=" + std::string(r.converged ? "1" : "0");
  line += " support=" + std::to_string(r.detected_support.size());
  char buf[48];
  std::snprintf(buf, sizeof(buf), " wall_time_s=%.6f", r.wall_time);
  return line + buf;
}

int run_solve(const SolveArgs& a) {
  const auto solver = mmv::parse_solver(a.solver);
  mmv::SolverConfig cfg;
  cfg.nesta.mu_final = a.mu_final;
  cfg.k_threshold = a.k_threshold;
  cfg.use_music = a.use_music;
  cfg.max_outer = a.max_outer;
  cfg.aggregator = mmv::parse_aggregator(a.aggregator);
  cfg.epsilon = a.eps;

  mmv::RecoveryReport rep;
  std::optional<double> rel_err;
  if (!a.matrix_file.empty() || !a.data_file.empty()) {
    if (a.matrix_file.empty() || a.data_file.empty())
      throw mmv::InvalidArgument("--matrix and --data must be given together");
    mmv::MmvProblem problem(mmv::csv::read_matrix(a.matrix_file), mmv::csv::read_matrix(a.data_file),
                            a.eps.value_or(0.0));
    const bool needs_k = solver == mmv::SolverKind::IhtMmv || solver == mmv::SolverKind::IterativeNesta;
    if (needs_k && a.k_threshold <= 0) throw mmv::InvalidArgument("--k-threshold is required for this solver");
    rep = mmv::run_solver(problem, solver, cfg, a.k_threshold);
  } else {
    mmv::ProblemSpec spec;
    bool rank_given = a.rank.has_value();
    if (!a.spec_file.empty()) {
      const auto table = mmv::kv::load(a.spec_file);
      spec = mmv::spec_from_table(table);
      rank_given |= table.count("rank") > 0;
    }
    if (a.n) spec.n = *a.n;
    if (a.big_n) spec.N = *a.big_n;
    if (a.l) spec.L = *a.l;
    if (a.k) spec.k = *a.k;
    if (a.rank) spec.rank = *a.rank;
    if (a.noise) spec.noise_sigma = *a.noise;
    if (a.seed) spec.seed = *a.seed;
    if (!a.matrix_kind.empty()) spec.matrix_kind = mmv::parse_matrix_kind(a.matrix_kind);
    if (!rank_given) spec.rank = std::min({spec.rank, spec.k, spec.L});
    const auto inst = mmv::gen_instance(spec);
    const mmv::MmvProblem problem = a.eps ? inst.problem.with_data(inst.problem.B(), *a.eps) : inst.problem;
    rep = mmv::run_solver(problem, solver, cfg, a.k_threshold > 0 ? a.k_threshold : spec.k);
    rel_err = mmv::relative_error(rep.estimate, inst.x_true);
  }
  std::cout << summary_line(a.solver, rel_err, rep) << '\n';
  if (!a.dump_estimate.empty()) mmv::csv::write_matrix(a.dump_estimate, rep.estimate);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-sparse (MMV) recovery: NESTA, iterative NESTA, IHT and MUSIC"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Recover one instance and print a summary line");
  solve->add_option("--spec", sa.spec_file, "Key-value problem spec file");
  solve->add_option("--n", sa.n, "Number of measurements");
  solve->add_option("--N", sa.big_n, "Signal dimension");
  solve->add_option("--L", sa.l, "Number of channels");
  solve->add_option("--k", sa.k, "Row sparsity");
  solve->add_option("--rank", sa.rank, "Rank of the nonzero block (default min(4, k, L))");
  solve->add_option("--noise", sa.noise, "Entrywise noise standard deviation");
  solve->add_option("--seed", sa.seed, "Instance seed");
  solve->add_option("--matrix-kind", sa.matrix_kind, "gaussian | row-orthonormal-gaussian");
  solve->add_option("--matrix", sa.matrix_file, "Measurement matrix CSV (external data)");
  solve->add_option("--data", sa.data_file, "Measurement block CSV (external data)");
  solve->add_option("--solver", sa.solver, "nesta | iterative-nesta | iht | smv");
  solve->add_option("--eps", sa.eps, "Frobenius noise radius");
  solve->add_option("--mu-final", sa.mu_final, "Final smoothing parameter (0 = automatic)");
  solve->add_option("--k-threshold", sa.k_threshold, "Rows kept by hard thresholding");
  solve->add_flag("--use-music", sa.use_music, "Seed iterative NESTA with MUSIC support");
  solve->add_option("--max-outer", sa.max_outer, "Outer iterations of iterative NESTA");
  solve->add_option("--aggregator", sa.aggregator, "row-l2 | entry-l1");
  solve->add_option("--dump-estimate", sa.dump_estimate, "Write the estimate as CSV");

  std::string sweep_config;
  std::optional<unsigned> sweep_threads;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write a result CSV");
  sweep->add_option("--config", sweep_config, "Key-value sweep configuration")->required();
  sweep->add_option("--threads", sweep_threads, "Worker threads (overrides config)");

  std::string spark_matrix;
  double spark_tol = 1e-10;
  auto* spark = app.add_subcommand("spark", "Brute-force numerical spark of a matrix (N <= 20)");
  spark->add_option("--matrix", spark_matrix, "Matrix CSV")->required();
  spark->add_option("--tol", spark_tol, "Relative singular-value tolerance");

  std::string music_matrix, music_data;
  long music_k = 0;
  double music_delta = 1e-8;
  auto* music = app.add_subcommand("music", "MUSIC support detection");
  music->add_option("--matrix", music_matrix, "Dictionary CSV")->required();
  music->add_option("--data", music_data, "Measurement block CSV")->required();
  music->add_option("--k", music_k, "Number of indices to select")->required();
  music->add_option("--delta", music_delta, "Relative rank threshold");

  std::string gen_prefix;
  mmv::ProblemSpec gen_spec;
  std::string gen_kind = "row-orthonormal-gaussian";
  auto* generate = app.add_subcommand("generate", "Write a synthetic instance as CSV files plus a spec sidecar");
  generate->add_option("--out", gen_prefix, "Output prefix")->required();
  generate->add_option("--n", gen_spec.n);
  generate->add_option("--N", gen_spec.N);
  generate->add_option("--L", gen_spec.L);
  generate->add_option("--k", gen_spec.k);
  std::optional<long> gen_rank;
  generate->add_option("--rank", gen_rank, "Rank of the nonzero block (default min(4, k, L))");
  generate->add_option("--noise", gen_spec.noise_sigma);
  generate->add_option("--seed", gen_spec.seed);
  generate->add_option("--matrix-kind", gen_kind);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*sweep) {
      auto cfg = mmv::sweep_config_from_table(mmv::kv::load(sweep_config));
      if (sweep_threads) cfg.threads = *sweep_threads;
      mmv::run_sweep(cfg, &std::cout);
      return kOk;
    }
    if (*spark) {
      std::cout << mmv::spark(mmv::MeasurementMatrix(mmv::csv::read_matrix(spark_matrix)), spark_tol) << '\n';
      return kOk;
    }
    if (*music) {
      mmv::MmvProblem p(mmv::csv::read_matrix(music_matrix), mmv::csv::read_matrix(music_data), 0.0);
      const auto res = mmv::music_support(p, music_k, music_delta);
      std::cout << "rank=" << res.rank << '\n' << "support=" << mmv::to_string(res.support) << '\n';
      return kOk;
    }
    if (*generate) {
      gen_spec.matrix_kind = mmv::parse_matrix_kind(gen_kind);
      gen_spec.rank = gen_rank ? *gen_rank : std::min({gen_spec.rank, gen_spec.k, gen_spec.L});
      mmv::export_instance(mmv::gen_instance(gen_spec), gen_prefix);
      return kOk;
    }
  } catch (const mmv::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const mmv::InfeasibleProblem& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const mmv::DegenerateInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const mmv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
