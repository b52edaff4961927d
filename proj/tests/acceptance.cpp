// Acceptance suite: one PASS/FAIL line per check, nonzero exit on any failure.
// Usage: mmv_acceptance <path-to-mmv-cli>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mmv/mmv.hpp"
#include "oracles.hpp"

using mmv::Matrix;
using mmv::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix randn(mmv::SplitMix64& g, long r, long c) {
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = g.normal();
  return m;
}

long pick(mmv::SplitMix64& g, long lo, long hi) { return lo + static_cast<long>(g.below(static_cast<std::uint64_t>(hi - lo + 1))); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- 1
Outcome gradient_check() {
  mmv::SplitMix64 g(101);
  const std::array<double, 3> mus = {1.0, 0.1, 0.01};
  int checked = 0, rejected = 0;
  double worst = 0.0;
  long entries = 0;
  while (checked < 50) {
    const long big_n = pick(g, 1, 30), l = pick(g, 1, 5);
    mmv::SmoothingConfig cfg;
    cfg.mu = mus[g.below(3)];
    cfg.aggregator = g.below(2) ? mmv::Aggregator::RowL2 : mmv::Aggregator::EntryL1;
    // mix of rows inside and outside the quadratic zone, plus zero rows
    Matrix a = randn(g, big_n, l);
    for (long j = 0; j < big_n; ++j) {
      const auto r = g.below(4);
      a.row(j) *= r == 0 ? 0.0 : r == 1 ? 0.3 * cfg.mu : r == 2 ? cfg.mu : 5.0 * cfg.mu;
    }
    const double h = 1e-6 * cfg.mu;
    // central differences are only valid away from the Huber kink
    bool near_kink = false;
    if (cfg.aggregator == mmv::Aggregator::RowL2) {
      for (long j = 0; j < big_n; ++j) near_kink |= std::abs(a.row(j).norm() - cfg.mu) < 10 * h;
    } else {
      near_kink = ((a.array().abs() - cfg.mu).abs() < 10 * h).any();
    }
    if (near_kink) {
      ++rejected;
      continue;
    }
    const Matrix grad = mmv::smoothed_gradient(a, cfg);
    const auto f = [&](const Matrix& x) { return mmv::smoothed_objective(x, cfg); };
    for (long i = 0; i < big_n; ++i)
      for (long j = 0; j < l; ++j) {
        const double err = std::abs(oracle::central_difference(f, a, i, j, h) - grad(i, j));
        const double ratio = err / std::max(1e-5 * std::abs(grad(i, j)), 1e-8);
        worst = std::max(worst, ratio);
        ++entries;
      }
    ++checked;
  }
  return {worst <= 1.0, std::to_string(checked) + " triples, " + std::to_string(entries) + " entries, worst error/tolerance " +
                            fmt(worst) + ", " + std::to_string(rejected) + " near-kink draws skipped"};
}

// ---------------------------------------------------------------- 2
Outcome projection_check() {
  mmv::SplitMix64 g(202);
  double worst_res = 0.0, worst_match = 0.0;
  int ortho = 0, general = 0;
  for (int t = 0; t < 100; ++t) {
    const long n = pick(g, 1, 10), big_n = pick(g, n, 20);
    const long l = pick(g, 1, 4);
    mmv::MeasurementMatrix a(randn(g, n, big_n));
    if (t % 2 == 0) a = mmv::row_orthonormalize(a);
    (a.row_orthonormal() ? ortho : general)++;
    const Matrix b = randn(g, n, l);
    const double eps = 0.05 + 0.5 * g.uniform();
    const mmv::MmvProblem p(a, b, eps);
    Matrix q = randn(g, big_n, l);
    while ((a.matrix() * q - b).norm() <= eps) q *= 3.0;
    const Matrix out = mmv::project_feasible(q, p);
    const Matrix ref = oracle::project_bisect(a.matrix(), b, eps, q, 0.0);
    worst_res = std::max(worst_res, std::abs((a.matrix() * out - b).norm() - eps));
    worst_match = std::max(worst_match, (out - ref).cwiseAbs().maxCoeff());
  }
  return {worst_res <= 1e-9 && worst_match <= 1e-8,
          std::to_string(ortho) + " row-orthonormal + " + std::to_string(general) + " general; max | ||res|| - eps | " +
              fmt(worst_res) + ", max oracle gap " + fmt(worst_match)};
}

// ---------------------------------------------------------------- 3
Outcome literal_steps_check() {
  const Matrix phi = (Matrix(2, 3) << 1.0, 0.5, -0.3, 0.2, -1.1, 0.7).finished();
  const Matrix b = (Matrix(2, 2) << 0.9, -0.4, 0.3, 1.2).finished();
  const double eps = 0.05, mu = 0.2;
  const mmv::MmvProblem p(phi, b, eps);
  const mmv::FeasibleSetProjector proj(p);
  mmv::SmoothingConfig sm;
  sm.mu = mu;
  const Matrix a0 = oracle::project_bisect(phi, b, eps, Matrix::Zero(3, 2), 0.0);
  oracle::LiteralNesta lit{phi, b, eps, mu, a0, a0, {}, a0, a0, 0};
  auto s = mmv::NestaState::start(a0);
  double worst = 0.0;
  for (int k = 0; k < 25; ++k) {
    lit.step();
    mmv::nesta_step(s, proj, sm);
    worst = std::max({worst, (s.y - lit.y).cwiseAbs().maxCoeff(), (s.z - lit.z).cwiseAbs().maxCoeff(),
                      (s.alpha - lit.alpha).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-12, "25 steps, max deviation " + fmt(worst)};
}

// ---------------------------------------------------------------- 4
Outcome nesta_recovery_check() {
  mmv::SolverConfig cfg;
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    mmv::ProblemSpec s;
    s.n = 40;
    s.N = 80;
    s.L = 4;
    s.k = 5;
    s.rank = 4;
    s.seed = seed;
    const auto r = mmv::run_trial(s, mmv::SolverKind::NestaMmv, cfg);
    ok += r.success;
    worst = std::max(worst, r.relative_error);
  }
  return {ok >= 45, std::to_string(ok) + "/50 successes, worst relative error " + fmt(worst)};
}

// ---------------------------------------------------------------- 5
Outcome mmv_vs_smv_check() {
  mmv::SolverConfig cfg;
  bool every = true, margin = false;
  std::string detail;
  for (long k : {8L, 10L, 12L, 14L}) {
    int mmv_ok = 0, smv_ok = 0;
    for (std::uint64_t t = 0; t < 25; ++t) {
      mmv::ProblemSpec s;
      s.n = 32;
      s.N = 64;
      s.L = 4;
      s.k = k;
      s.rank = 4;
      s.seed = 1 + t;
      mmv_ok += mmv::run_trial(s, mmv::SolverKind::NestaMmv, cfg).success;
      smv_ok += mmv::run_trial(s, mmv::SolverKind::NestaSmvPerColumn, cfg).success;
    }
    const double a = mmv_ok / 25.0, b = smv_ok / 25.0;
    every &= a >= b;
    margin |= a - b >= 0.2 - 1e-12;
    detail += "k=" + std::to_string(k) + ": " + fmt(a) + " vs " + fmt(b) + "; ";
  }
  return {every && margin, "mmv vs smv success " + detail.substr(0, detail.size() - 2)};
}

// ---------------------------------------------------------------- 6
Outcome music_check() {
  int exact = 0, total = 0;
  double max_in = 0.0, min_out = 1.0;
  for (long k : {2L, 3L, 4L}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      mmv::ProblemSpec s;
      s.k = k;
      s.rank = k;
      s.L = k;
      s.n = 2 * k + 2;
      s.N = 4 * k;
      s.matrix_kind = mmv::MatrixKind::Gaussian;
      s.seed = 600 + 100 * static_cast<std::uint64_t>(k) + seed;
      const auto inst = mmv::gen_instance(s);
      const auto res = mmv::music_support(inst.problem, k);
      ++total;
      exact += res.support == inst.support_true;
      for (long j = 0; j < s.N; ++j) {
        const double sc = res.scores(j);
        if (inst.support_true.contains(static_cast<std::size_t>(j)))
          max_in = std::max(max_in, sc);
        else
          min_out = std::min(min_out, sc);
      }
    }
  }
  return {exact == total && max_in < 1e-8 && min_out > 1e-2,
          std::to_string(exact) + "/" + std::to_string(total) + " exact, max in-support score " + fmt(max_in) +
              ", min out-of-support score " + fmt(min_out)};
}

// ---------------------------------------------------------------- 7
// Generic 6x12 Gaussian matrices have spark 7 = n + 1, which would ask for 6
// nonzero rows from 6 measurements. A random dependency among d columns is
// planted instead, so the brute-forced spark spreads over 3..6.
Matrix planted_spark_matrix(mmv::SplitMix64& g, long d) {
  Matrix a = randn(g, 6, 12);
  std::vector<long> cols(12);
  for (long i = 0; i < 12; ++i) cols[i] = i;
  for (long i = 0; i < d; ++i) std::swap(cols[i], cols[pick(g, i, 11)]);
  Vector mix = Vector::Zero(6);
  for (long i = 0; i + 1 < d; ++i) mix += (0.5 + g.uniform()) * (g.below(2) ? 1.0 : -1.0) * a.col(cols[i]);
  a.col(cols[d - 1]) = mix;
  return a;
}

Outcome spark_recovery_check() {
  mmv::SplitMix64 g(707);
  int ok = 0;
  std::string sparks;
  for (int t = 0; t < 10; ++t) {
    const Matrix a = planted_spark_matrix(g, 3 + t % 4);
    const long s = mmv::spark(mmv::MeasurementMatrix(a));
    sparks += std::to_string(s) + (t < 9 ? "," : "");
    const long k = s - 1;
    // support of size k and a k x k full-rank block
    std::vector<std::size_t> idx(12);
    for (std::size_t i = 0; i < 12; ++i) idx[i] = i;
    for (long i = 0; i < k; ++i) std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(g, i, 11))]);
    const mmv::SupportSet truth(std::vector<std::size_t>(idx.begin(), idx.begin() + k));
    Matrix x = Matrix::Zero(12, k);
    for (auto j : truth) x.row(static_cast<long>(j)) = randn(g, 1, k);
    const mmv::MmvProblem p(a, a * x, 0.0);
    mmv::IterativeNestaConfig it;
    it.k = k;
    it.use_music = true;
    const auto rep = mmv::iterative_nesta(p, mmv::SmoothingConfig{}, mmv::NestaConfig{}, it);
    ok += rep.detected_support == truth;
  }
  return {ok >= 9, std::to_string(ok) + "/10 exact supports, sparks " + sparks};
}

// ---------------------------------------------------------------- 8
Outcome iht_check() {
  mmv::SplitMix64 g(808);
  int monotone = 0;
  long steps = 0;
  for (int t = 0; t < 50; ++t) {
    mmv::ProblemSpec s;
    s.N = pick(g, 10, 60);
    s.n = pick(g, 4, s.N - 1);
    s.L = pick(g, 1, 5);
    s.k = pick(g, 1, std::min(s.n, s.N - 1));
    s.rank = pick(g, 1, std::min(s.k, s.L));
    s.noise_sigma = t % 3 == 0 ? 0.01 : 0.0;
    s.matrix_kind = t % 2 ? mmv::MatrixKind::Gaussian : mmv::MatrixKind::RowOrthonormalGaussian;
    s.seed = g.next();
    const auto inst = mmv::gen_instance(s);
    mmv::IhtConfig cfg;
    cfg.k = s.k;
    const auto rep = mmv::iht_solve(inst.problem, cfg);
    bool mono = true;
    for (std::size_t i = 1; i < rep.residual_trace.size(); ++i)
      mono &= rep.residual_trace[i] <= rep.residual_trace[i - 1] * (1.0 + 1e-12) + 1e-15;
    monotone += mono;
    steps += static_cast<long>(rep.residual_trace.size()) - 1;
  }

  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    mmv::ProblemSpec s;
    s.n = 8;
    s.N = 16;
    s.L = 3;
    s.k = 2;
    s.rank = 2;
    s.seed = 800 + seed;
    const auto inst = mmv::gen_instance(s);
    mmv::IhtConfig cfg;
    cfg.k = 2;
    const auto rep = mmv::iht_solve(inst.problem, cfg);
    const auto best = oracle::best_support_ls(inst.problem.phi(), inst.problem.B(), 2);
    matched += rep.detected_support == mmv::SupportSet(std::vector<std::size_t>(best.begin(), best.end()));
  }
  return {monotone == 50 && matched >= 18, "monotone residual in " + std::to_string(monotone) + "/50 runs (" +
                                               std::to_string(steps) + " steps); exhaustive-oracle support match " +
                                               std::to_string(matched) + "/20"};
}

// ---------------------------------------------------------------- 9
Outcome known_support_check() {
  std::vector<double> plain, informed;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    mmv::ProblemSpec s;
    s.n = 32;
    s.N = 64;
    s.L = 4;
    s.k = 8;
    s.rank = 4;
    s.seed = 900 + seed;
    const auto inst = mmv::gen_instance(s);
    mmv::SmoothingConfig sm;
    plain.push_back(static_cast<double>(mmv::nesta_solve(inst.problem, sm, mmv::NestaConfig{}).inner_iterations));
    const auto& t = inst.support_true.indices();
    sm.known_support = mmv::SupportSet(std::vector<std::size_t>(t.begin(), t.begin() + 4));
    informed.push_back(static_cast<double>(mmv::nesta_solve(inst.problem, sm, mmv::NestaConfig{}).inner_iterations));
  }
  const double a = mmv::median(plain), b = mmv::median(informed);
  return {b < a, "median inner iterations " + fmt(b) + " with half the support known vs " + fmt(a) + " without"};
}

// ---------------------------------------------------------------- 10
struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& cli, const std::string& args) {
  CliRun r;
  FILE* pipe = popen((cli + " " + args + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Remove " wall_time_s=..." from summary lines and the wall_time_s CSV column.
std::string strip_times(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (auto pos = line.find(" wall_time_s="); pos != std::string::npos) {
      const auto end = line.find(' ', pos + 1);
      line.erase(pos, end == std::string::npos ? std::string::npos : end - pos);
    } else if (std::count(line.begin(), line.end(), ',') == 13) {
      std::size_t pos = 0;
      for (int c = 0; c < 12; ++c) pos = line.find(',', pos) + 1;
      line.erase(pos, line.find(',', pos) - pos);
    }
    out += line + "\n";
  }
  return out;
}

Outcome determinism_check(const std::string& cli) {
  const auto dir = std::filesystem::temp_directory_path() / ("mmv_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string d = dir.string();
  {
    std::ofstream cfg(dir / "sweep.cfg");
    cfg << "grid.k = 3, 5\ngrid.n = 16\ntrials = 3\nsolvers = nesta, iterative-nesta, iht, smv\n"
        << "N = 32\nL = 3\nrank = 3\nseed = 77\n";
  }
  struct Case {
    std::string label;
    std::function<std::string(const std::string&)> args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases = {
      {"solve nesta", [](const std::string&) { return std::string("solve --n 24 --N 48 --L 3 --k 4 --rank 3 --seed 5"); }, {}},
      {"solve iterative-nesta",
       [](const std::string&) {
         return std::string("solve --n 20 --N 40 --L 2 --k 4 --rank 2 --noise 0.01 --solver iterative-nesta --use-music --seed 6");
       },
       {}},
      {"solve iht", [&](const std::string& tag) { return "solve --n 24 --N 48 --k 3 --solver iht --seed 7 --dump-estimate " + d + "/est" + tag + ".csv"; },
       {"est"}},
      {"solve smv", [](const std::string&) { return std::string("solve --n 24 --N 48 --L 2 --k 3 --rank 2 --solver smv --seed 8"); }, {}},
      {"generate", [&](const std::string& tag) { return "generate --n 8 --N 16 --k 3 --seed 9 --noise 0.1 --out " + d + "/gen" + tag; },
       {"gen_A", "gen_B", "gen_X"}},
      {"spark", [&](const std::string&) { return "spark --matrix " + d + "/gena_A.csv"; }, {}},
      {"music", [&](const std::string&) { return "music --matrix " + d + "/gena_A.csv --data " + d + "/gena_B.csv --k 3"; }, {}},
      {"sweep",
       [&](const std::string& tag) {
         std::ofstream(dir / ("sweep" + tag + ".cfg")) << slurp(dir / "sweep.cfg") << "output = " << d << "/sweep" << tag << ".csv\n";
         return "sweep --config " + d + "/sweep" + tag + ".cfg --threads " + (tag == "a" ? "1" : "2");
       },
       {"sweep"}},
  };
  int same = 0;
  std::string failed;
  for (const auto& c : cases) {
    const auto ra = run_cli(cli, c.args("a"));
    const auto rb = run_cli(cli, c.args("b"));
    bool eq = ra.code == 0 && rb.code == 0 && strip_times(ra.out) == strip_times(rb.out);
    for (const auto& f : c.files) {
      // "gen_A" -> gena_A.csv / genb_A.csv, "est" -> esta.csv / estb.csv
      const auto us = f.find('_');
      const std::string stem = us == std::string::npos ? f : f.substr(0, us);
      const std::string rest = us == std::string::npos ? "" : f.substr(us);
      const std::string fa = slurp(dir / (stem + "a" + rest + ".csv")), fb = slurp(dir / (stem + "b" + rest + ".csv"));
      eq &= !fa.empty() && strip_times(fa) == strip_times(fb);
    }
    if (eq)
      ++same;
    else
      failed += " " + c.label;
  }
  std::filesystem::remove_all(dir);
  return {same == static_cast<int>(cases.size()),
          std::to_string(same) + "/" + std::to_string(cases.size()) + " invocations reproduced" +
              (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mmv_acceptance <mmv-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"gradient matches central differences", gradient_check},
      {"projection radius and bisection oracle", projection_check},
      {"step matches literal transcription", literal_steps_check},
      {"noiseless NESTA-MMV recovery", nesta_recovery_check},
      {"MMV beats per-column SMV", mmv_vs_smv_check},
      {"MUSIC exact support", music_check},
      {"spark-level recovery with MUSIC seeding", spark_recovery_check},
      {"IHT monotone descent and oracle match", iht_check},
      {"known support speeds up NESTA", known_support_check},
      {"CLI output is deterministic", [&] { return determinism_check(cli); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << checks[i].first << ": " << o.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failures)) << "/" << checks.size() << " acceptance checks passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
