#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "mmv/core.hpp"
#include "mmv/csv.hpp"
#include "mmv/kv.hpp"
#include "mmv/rng.hpp"

namespace mmv {

enum class MatrixKind { Gaussian, RowOrthonormalGaussian };

inline std::string to_string(MatrixKind k) {
  return k == MatrixKind::Gaussian ? "gaussian" : "row-orthonormal-gaussian";
}

inline MatrixKind parse_matrix_kind(const std::string& s) {
  if (s == "gaussian") return MatrixKind::Gaussian;
  if (s == "row-orthonormal-gaussian" || s == "orthonormal") return MatrixKind::RowOrthonormalGaussian;
  throw InvalidArgument("unknown matrix kind: " + s);
}

struct ProblemSpec {
  long n = 20;
  long N = 40;
  long L = 4;
  long k = 5;
  long rank = 4;
  double noise_sigma = 0.0;
  MatrixKind matrix_kind = MatrixKind::RowOrthonormalGaussian;
  std::uint64_t seed = 1;

  void validate() const {
    detail::require(n >= 1 && N >= 1 && L >= 1 && k >= 1, "n, N, L, k must be positive");
    detail::require(k < N, "k must be smaller than N");
    detail::require(rank >= 1 && rank <= std::min(k, L), "rank must satisfy 1 <= rank <= min(k, L)");
    detail::require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be >= 0");
    detail::require(matrix_kind != MatrixKind::RowOrthonormalGaussian || n <= N,
                    "row-orthonormal matrices need n <= N");
  }

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct GroundTruthInstance {
  ProblemSpec spec;
  MmvProblem problem;
  Matrix x_true;
  SupportSet support_true;
};

namespace detail {

inline Matrix normal_matrix(SplitMix64& rng, long rows, long cols) {
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = rng.normal();  // row-major draw order
  return m;
}

}  // namespace detail

// Draw order: A (row-major), support (partial Fisher-Yates), the factor
// pair of the nonzero block (re-drawn while rank deficient), then noise.
inline GroundTruthInstance gen_instance(const ProblemSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);

  MeasurementMatrix a(detail::normal_matrix(rng, spec.n, spec.N));
  if (spec.matrix_kind == MatrixKind::RowOrthonormalGaussian) a = row_orthonormalize(a);

  std::vector<std::size_t> perm(static_cast<std::size_t>(spec.N));
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (long i = 0; i < spec.k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(spec.N - i));
    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
  }
  SupportSet support(std::vector<std::size_t>(perm.begin(), perm.begin() + spec.k));

  Matrix block;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 100) throw DegenerateInput("gen_instance: could not draw a block of the requested rank");
    const Matrix f = detail::normal_matrix(rng, spec.k, spec.rank);
    const Matrix g = detail::normal_matrix(rng, spec.rank, spec.L);
    block = f * g;
    if (numerical_rank(block, 1e-10) == spec.rank && block.rowwise().norm().minCoeff() > 0.0) break;
  }
  Matrix x = Matrix::Zero(spec.N, spec.L);
  long r = 0;
  for (auto j : support) x.row(static_cast<Eigen::Index>(j)) = block.row(r++);

  Matrix b = a.matrix() * x;
  double eps = 0.0;
  if (spec.noise_sigma > 0.0) {
    b += spec.noise_sigma * detail::normal_matrix(rng, spec.n, spec.L);
    eps = 1.1 * std::sqrt(static_cast<double>(spec.n * spec.L)) * spec.noise_sigma;
  }
  return {spec, MmvProblem(std::move(a), std::move(b), eps), std::move(x), std::move(support)};
}

// Sidecar keys: n, N, L, k, rank, noise_sigma, matrix_kind, seed.
inline ProblemSpec spec_from_table(const kv::Table& t, ProblemSpec base = {}) {
  auto get = [&](const char* key) -> const std::string* {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  };
  if (auto v = get("n")) base.n = kv::to_long("n", *v);
  if (auto v = get("N")) base.N = kv::to_long("N", *v);
  if (auto v = get("L")) base.L = kv::to_long("L", *v);
  if (auto v = get("k")) base.k = kv::to_long("k", *v);
  if (auto v = get("rank")) base.rank = kv::to_long("rank", *v);
  if (auto v = get("noise_sigma")) base.noise_sigma = kv::to_double("noise_sigma", *v);
  if (auto v = get("noise")) base.noise_sigma = kv::to_double("noise", *v);
  if (auto v = get("matrix_kind")) base.matrix_kind = parse_matrix_kind(*v);
  if (auto v = get("seed")) base.seed = kv::to_u64("seed", *v);
  return base;
}

inline void write_spec(std::ostream& os, const ProblemSpec& s) {
  os << "n = " << s.n << '\n'
     << "N = " << s.N << '\n'
     << "L = " << s.L << '\n'
     << "k = " << s.k << '\n'
     << "rank = " << s.rank << '\n'
     << "noise_sigma = " << csv::format_real(s.noise_sigma) << '\n'
     << "matrix_kind = " << to_string(s.matrix_kind) << '\n'
     << "seed = " << s.seed << '\n';
}

// <prefix>_A.csv, <prefix>_B.csv, <prefix>_X.csv and <prefix>_spec.txt.
inline void export_instance(const GroundTruthInstance& inst, const std::string& prefix) {
  csv::write_matrix(prefix + "_A.csv", inst.problem.A());
  csv::write_matrix(prefix + "_B.csv", inst.problem.B());
  csv::write_matrix(prefix + "_X.csv", inst.x_true);
  std::ofstream side(prefix + "_spec.txt");
  if (!side) throw IoError("cannot open for writing: " + prefix + "_spec.txt");
  write_spec(side, inst.spec);
  side << "epsilon = " << csv::format_real(inst.problem.epsilon()) << '\n';
  side << "support = ";
  bool first = true;
  for (auto j : inst.support_true) {
    side << (first ? "" : ",") << j;
    first = false;
  }
  side << '\n';
}

inline GroundTruthInstance import_instance(const std::string& prefix) {
  const kv::Table t = kv::load(prefix + "_spec.txt");
  ProblemSpec spec = spec_from_table(t);
  Matrix a = csv::read_matrix(prefix + "_A.csv");
  Matrix b = csv::read_matrix(prefix + "_B.csv");
  Matrix x = csv::read_matrix(prefix + "_X.csv");
  double eps = 0.0;
  if (auto it = t.find("epsilon"); it != t.end()) eps = kv::to_double("epsilon", it->second);
  std::vector<std::size_t> idx;
  if (auto it = t.find("support"); it != t.end())
    for (const auto& s : kv::to_list(it->second)) idx.push_back(static_cast<std::size_t>(kv::to_long("support", s)));
  detail::require(a.cols() == x.rows() && b.cols() == x.cols(), "imported instance has inconsistent shapes");
  return {spec, MmvProblem(MeasurementMatrix(std::move(a)), std::move(b), eps), std::move(x), SupportSet(std::move(idx))};
}

}  // namespace mmv
