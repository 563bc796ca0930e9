// Copyright 2026 The mismm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MISMM_QP_H_
#define MISMM_QP_H_

#include <Eigen/Dense>

namespace mismm {

// Dense convex quadratic program
//
//   minimize    1/2 x'Px + q'x
//   subject to  A x  = b
//               G x <= h
//               lower <= x <= upper
//
// P must be positive semidefinite. Empty A/G mean no such constraints; empty
// lower/upper mean unbounded, and individual entries may be +-infinity.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct QpOptions {
  // Scaled primal/dual residual and duality gap required for convergence.
  double tolerance = 1e-10;
  // Accepted when progress stalls before `tolerance` is reached.
  double acceptable_tolerance = 1e-7;
  int max_iterations = 200;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_dual;     // y in  Px + q + A'y + G'z - zl + zu = 0
  Eigen::VectorXd ineq_dual;   // z >= 0
  Eigen::VectorXd lower_dual;  // per variable, 0 where unbounded
  Eigen::VectorXd upper_dual;
  double objective = 0.0;
  int iterations = 0;
  // Max of the scaled stationarity, feasibility and gap measures.
  double residual = 0.0;
};

// Mehrotra predictor-corrector primal-dual interior point method. Throws
// SolverError when the acceptable tolerance is not met.
QpSolution SolveQp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace mismm

#endif  // MISMM_QP_H_
