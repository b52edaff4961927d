#pragma once

#include <vector>

#include "mmv/types.hpp"

namespace mmv {

struct RecoveryReport {
  Matrix estimate;        // X = Psi alpha
  Matrix coefficients;    // alpha
  long inner_iterations = 0;
  long outer_iterations = 1;
  double final_residual = 0.0;   // ||A X - B||_F
  double final_objective = 0.0;
  SupportSet detected_support;
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;
  bool converged = false;
  double wall_time = 0.0;  // seconds
};

}  // namespace mmv
