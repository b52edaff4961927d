#pragma once

#include <cmath>
#include <string>

#include "mmv/types.hpp"

namespace mmv {

// Which homogeneous row function gets smoothed.
enum class Aggregator {
  RowL2,    // m(row) = ||row||_2, smoothed l_{1,2}
  EntryL1,  // each entry smoothed separately, smoothed l_{1,1}
};

inline std::string to_string(Aggregator a) { return a == Aggregator::RowL2 ? "row-l2" : "entry-l1"; }

inline Aggregator parse_aggregator(const std::string& s) {
  if (s == "row-l2" || s == "l12") return Aggregator::RowL2;
  if (s == "entry-l1" || s == "l11") return Aggregator::EntryL1;
  throw InvalidArgument("unknown aggregator: " + s);
}

// Nesterov smoothing of sum_{j not in T} m(alpha(j,:)) with prox
// p_d(u) = 1/2 ||u||^2 over the dual ball matching the aggregator. The
// closed form is the Huber function h_mu applied per row (RowL2) or per
// entry (EntryL1); the gradient is 1/mu Lipschitz in both cases.
struct SmoothingConfig {
  double mu = 1.0;
  Aggregator aggregator = Aggregator::RowL2;
  SupportSet known_support;  // rows excluded from the objective

  void validate() const {
    detail::require(mu > 0.0 && std::isfinite(mu), "smoothing mu must be positive");
  }
  double lipschitz() const { return 1.0 / mu; }
};

// h_mu(t) = t - mu/2 for t >= mu, t^2 / (2 mu) otherwise.
inline double huber(double t, double mu) { return t >= mu ? t - 0.5 * mu : t * t / (2.0 * mu); }

inline double smoothed_objective(const Matrix& alpha, const SmoothingConfig& cfg) {
  cfg.validate();
  const auto mask = cfg.known_support.mask(static_cast<std::size_t>(alpha.rows()));
  double f = 0.0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    if (mask[static_cast<std::size_t>(j)]) continue;
    if (cfg.aggregator == Aggregator::RowL2) {
      f += huber(alpha.row(j).norm(), cfg.mu);
    } else {
      for (Eigen::Index l = 0; l < alpha.cols(); ++l) f += huber(std::abs(alpha(j, l)), cfg.mu);
    }
  }
  return f;
}

inline void smoothed_gradient_into(const Matrix& alpha, const SmoothingConfig& cfg,
                                   const std::vector<bool>& mask, Matrix& grad) {
  grad.resize(alpha.rows(), alpha.cols());
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    if (mask[static_cast<std::size_t>(j)]) {
      grad.row(j).setZero();
      continue;
    }
    if (cfg.aggregator == Aggregator::RowL2) {
      const double nrm = alpha.row(j).norm();
      grad.row(j) = alpha.row(j) / std::max(nrm, cfg.mu);
    } else {
      for (Eigen::Index l = 0; l < alpha.cols(); ++l)
        grad(j, l) = alpha(j, l) / std::max(std::abs(alpha(j, l)), cfg.mu);
    }
  }
}

inline Matrix smoothed_gradient(const Matrix& alpha, const SmoothingConfig& cfg) {
  cfg.validate();
  Matrix g;
  smoothed_gradient_into(alpha, cfg, cfg.known_support.mask(static_cast<std::size_t>(alpha.rows())), g);
  return g;
}

}  // namespace mmv
