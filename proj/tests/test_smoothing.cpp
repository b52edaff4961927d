#include <gtest/gtest.h>

#include "mmv/core.hpp"
#include "mmv/smoothing.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using mmv::Aggregator;
using mmv::Matrix;
using mmv::SmoothingConfig;

namespace {

// max_{u in dual ball} <u, a> - mu/2 ||u||^2 by projected gradient ascent.
// The ball is the unit l2 ball per row (RowL2) or the unit box (EntryL1).
double dual_value(const Matrix& a, double mu, Aggregator agg) {
  Matrix u = Matrix::Zero(a.rows(), a.cols());
  const double step = 1.0 / mu;
  for (int it = 0; it < 20000; ++it) {
    u += step * (a - mu * u);
    if (agg == Aggregator::RowL2) {
      for (long j = 0; j < u.rows(); ++j) {
        const double nrm = u.row(j).norm();
        if (nrm > 1.0) u.row(j) /= nrm;
      }
    } else {
      u = u.cwiseMax(-1.0).cwiseMin(1.0);
    }
  }
  return (u.cwiseProduct(a)).sum() - 0.5 * mu * u.squaredNorm();
}

SmoothingConfig cfg(double mu, Aggregator agg = Aggregator::RowL2, mmv::SupportSet t = {}) {
  SmoothingConfig c;
  c.mu = mu;
  c.aggregator = agg;
  c.known_support = std::move(t);
  return c;
}

}  // namespace

TEST(SmoothedObjective, MatchesDualMaximization) {
  const Matrix a = (Matrix(1, 2) << 3, 4).finished();
  const double dual = dual_value(a, 1.0, Aggregator::RowL2);
  EXPECT_NEAR(dual, 4.5, 1e-9);
  EXPECT_NEAR(mmv::smoothed_objective(a, cfg(1.0)), 4.5, 1e-15);

  std::mt19937_64 g(21);
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = trial % 2 ? 0.5 : 2.0;
    Matrix x = testutil::randn(g, 4, 3);
    x.row(1) *= 0.1;  // quadratic branch
    for (auto agg : {Aggregator::RowL2, Aggregator::EntryL1})
      EXPECT_NEAR(mmv::smoothed_objective(x, cfg(mu, agg)), dual_value(x, mu, agg), 1e-9);
  }
}

TEST(SmoothedObjective, ZeroAndMasked) {
  EXPECT_EQ(mmv::smoothed_objective(Matrix::Zero(5, 3), cfg(0.3)), 0.0);
  EXPECT_EQ(mmv::smoothed_objective(Matrix::Zero(5, 3), cfg(0.3, Aggregator::EntryL1)), 0.0);
  const Matrix a = (Matrix(1, 2) << 3, 4).finished();
  for (double mu : {0.01, 1.0, 10.0}) EXPECT_EQ(mmv::smoothed_objective(a, cfg(mu, Aggregator::RowL2, {0})), 0.0);
}

TEST(SmoothedObjective, RejectsNonPositiveMu) {
  EXPECT_THROW(mmv::smoothed_objective(Matrix::Ones(2, 2), cfg(0.0)), mmv::InvalidArgument);
}

TEST(SmoothedGradient, Examples) {
  const Matrix a = (Matrix(1, 2) << 3, 4).finished();
  const Matrix g = mmv::smoothed_gradient(a, cfg(1.0));
  EXPECT_NEAR(g(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.8, 1e-15);

  const Matrix small = (Matrix(1, 2) << 0.3, 0.4).finished();
  const Matrix gs = mmv::smoothed_gradient(small, cfg(1.0));
  EXPECT_NEAR(gs(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(gs(0, 1), 0.4, 1e-15);

  // both examples agree with central differences
  auto f = [](const Matrix& x) { return mmv::smoothed_objective(x, cfg(1.0)); };
  for (const Matrix& x : {a, small})
    for (long j = 0; j < 2; ++j)
      EXPECT_NEAR(oracle::central_difference(f, x, 0, j, 1e-6), mmv::smoothed_gradient(x, cfg(1.0))(0, j), 1e-6);

  const Matrix two = (Matrix(2, 2) << 3, 4, 1, 1).finished();
  const Matrix masked = mmv::smoothed_gradient(two, cfg(1.0, Aggregator::RowL2, {1}));
  EXPECT_EQ(masked.row(1).norm(), 0.0);
}

TEST(SmoothedGradient, RowNormsBoundedByOne) {
  std::mt19937_64 g(4);
  for (int t = 0; t < 50; ++t) {
    const Matrix x = testutil::randn(g, 10, 3) * testutil::uniform(g, 0.01, 10);
    for (auto agg : {Aggregator::RowL2, Aggregator::EntryL1}) {
      const Matrix gr = mmv::smoothed_gradient(x, cfg(0.5, agg));
      if (agg == Aggregator::RowL2)
        EXPECT_LE(gr.rowwise().norm().maxCoeff(), 1.0 + 1e-15);
      else
        EXPECT_LE(gr.cwiseAbs().maxCoeff(), 1.0 + 1e-15);
    }
  }
}

TEST(SmoothedObjective, SandwichAroundMixedNorm) {
  std::mt19937_64 g(8);
  for (int t = 0; t < 100; ++t) {
    const long n = testutil::uniform_int(g, 1, 20), l = testutil::uniform_int(g, 1, 5);
    const double mu = std::pow(10.0, testutil::uniform(g, -2, 0));
    Matrix x = testutil::randn(g, n, l) * testutil::uniform(g, 0.01, 2);
    std::vector<std::size_t> known;
    for (long j = 0; j < n; ++j)
      if (testutil::uniform(g) < 0.2) known.push_back(static_cast<std::size_t>(j));
    const mmv::SupportSet ts(known);
    Matrix rest = x;
    for (auto j : ts) rest.row(static_cast<long>(j)).setZero();
    const double free_rows = static_cast<double>(n) - static_cast<double>(ts.size());

    const double f12 = mmv::smoothed_objective(x, cfg(mu, Aggregator::RowL2, ts));
    const double n12 = mmv::mixed_norm(rest, 1, 2);
    EXPECT_LE(f12, n12 + 1e-12);
    EXPECT_LE(n12, f12 + mu * free_rows / 2 + 1e-12);

    const double f11 = mmv::smoothed_objective(x, cfg(mu, Aggregator::EntryL1, ts));
    const double n11 = mmv::mixed_norm(rest, 1, 1);
    EXPECT_LE(f11, n11 + 1e-12);
    EXPECT_LE(n11, f11 + mu * free_rows * static_cast<double>(l) / 2 + 1e-12);
  }
}

TEST(SmoothedGradient, LipschitzAndConvexity) {
  std::mt19937_64 g(13);
  for (int t = 0; t < 200; ++t) {
    const long n = testutil::uniform_int(g, 1, 15), l = testutil::uniform_int(g, 1, 4);
    const double mu = std::pow(10.0, testutil::uniform(g, -2, 0));
    const auto agg = t % 2 ? Aggregator::RowL2 : Aggregator::EntryL1;
    const double s = testutil::uniform(g, 0.001, 2.0);
    const Matrix a = testutil::randn(g, n, l) * s, b = testutil::randn(g, n, l) * s;
    const auto c = cfg(mu, agg);
    const double lhs = (mmv::smoothed_gradient(a, c) - mmv::smoothed_gradient(b, c)).norm();
    EXPECT_LE(lhs, (a - b).norm() / mu * (1 + 1e-12) + 1e-15);

    const double w = testutil::uniform(g);
    const double mid = mmv::smoothed_objective(w * a + (1 - w) * b, c);
    EXPECT_LE(mid, w * mmv::smoothed_objective(a, c) + (1 - w) * mmv::smoothed_objective(b, c) + 1e-12);
  }
}
