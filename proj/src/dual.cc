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

#include "mismm/dual.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mismm/errors.h"
#include "mismm/qp.h"

namespace mismm {
namespace {

// Strict-interior margin relative to the bound.
constexpr double kInteriorMargin = 1e-8;

}  // namespace

void CostWeights::Validate() const {
  if (!(positive > 0.0 && std::isfinite(positive) && negative > 0.0 &&
        std::isfinite(negative))) {
    throw DataError("cost C must be positive and finite");
  }
}

void DualProblem::Validate() const {
  cost.Validate();
  const int n = size();
  if (n == 0) throw DataError("dual: empty effective set");
  if (gram.rows() != n || gram.cols() != n) {
    throw DataError("dual: gram is not |E| x |E|");
  }
  if (static_cast<int>(group.size()) != n) {
    throw DataError("dual: group map size mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      has_pos = true;
      if (group[i] != -1) throw DataError("dual: positive instance in a group");
    } else if (labels[i] == -1) {
      has_neg = true;
      if (group[i] < 0 || group[i] >= num_groups) {
        throw DataError("dual: negative instance without a group");
      }
    } else {
      throw DataError("dual: labels must be -1/+1");
    }
  }
  if (!has_pos || !has_neg) {
    throw DataError("dual: both classes must be present");
  }
}

double DualObjective(const DualProblem& problem, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd ya(alpha.size());
  for (int i = 0; i < problem.size(); ++i) ya(i) = alpha(i) * problem.labels[i];
  return alpha.sum() - 0.5 * ya.dot(problem.gram * ya);
}

DualSolution SolveDual(const DualProblem& problem, double tol) {
  problem.Validate();
  const int n = problem.size();

  std::vector<int> group_size(problem.num_groups, 0);
  for (int g : problem.group) {
    if (g >= 0) ++group_size[g];
  }
  std::vector<int> group_row(problem.num_groups, -1);
  int rows = 0;
  for (int g = 0; g < problem.num_groups; ++g) {
    if (group_size[g] > 1) group_row[g] = rows++;
  }

  QpProblem qp;
  qp.hessian.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      qp.hessian(i, j) =
          problem.labels[i] * problem.labels[j] * problem.gram(i, j);
    }
  }
  qp.linear = Eigen::VectorXd::Constant(n, -1.0);
  qp.eq_matrix.resize(1, n);
  for (int i = 0; i < n; ++i) qp.eq_matrix(0, i) = problem.labels[i];
  qp.eq_rhs = Eigen::VectorXd::Zero(1);
  qp.lower = Eigen::VectorXd::Zero(n);
  qp.upper =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  qp.ineq_matrix = Eigen::MatrixXd::Zero(rows, n);
  qp.ineq_rhs = Eigen::VectorXd::Constant(rows, problem.cost.negative);
  for (int i = 0; i < n; ++i) {
    const int g = problem.group[i];
    if (g < 0) {
      qp.upper(i) = problem.cost.positive;
    } else if (group_row[g] < 0) {
      qp.upper(i) = problem.cost.negative;
    } else {
      qp.ineq_matrix(group_row[g], i) = 1.0;
    }
  }

  QpOptions options;
  options.acceptable_tolerance = std::min(tol, options.acceptable_tolerance);
  QpSolution qs;
  try {
    qs = SolveQp(qp, options);
  } catch (const SolverError& e) {
    throw SolverError(std::string("dual solver: ") + e.what());
  }

  DualSolution sol;
  sol.alpha = qs.x;
  for (int i = 0; i < n; ++i) {
    const double bound = problem.group[i] < 0 ? problem.cost.positive
                                              : problem.cost.negative;
    if (sol.alpha(i) < 1e-12 * bound) sol.alpha(i) = 0.0;
    sol.alpha(i) = std::min(sol.alpha(i), bound);
  }
  sol.objective = DualObjective(problem, sol.alpha);
  sol.kkt_residual = qs.residual;
  sol.iterations = qs.iterations;
  if (!(sol.kkt_residual <= tol)) {
    throw SolverError("dual solver: KKT residual " +
                      std::to_string(sol.kkt_residual) + " above tolerance");
  }
  const BiasResult bias = ComputeBias(problem, sol.alpha);
  sol.bias = bias.bias;
  sol.bias_fallback = bias.fallback;
  return sol;
}

BiasResult ComputeBias(const DualProblem& problem,
                       const Eigen::VectorXd& alpha) {
  const int n = problem.size();
  Eigen::VectorXd ya(n);
  for (int i = 0; i < n; ++i) ya(i) = alpha(i) * problem.labels[i];
  const Eigen::VectorXd f = problem.gram * ya;  // bias-free scores

  std::vector<double> group_sum(problem.num_groups, 0.0);
  for (int i = 0; i < n; ++i) {
    if (problem.group[i] >= 0) group_sum[problem.group[i]] += alpha(i);
  }
  const double eps_pos = kInteriorMargin * problem.cost.positive;
  const double eps_neg = kInteriorMargin * problem.cost.negative;

  BiasResult result;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    bool eligible;
    if (problem.group[i] < 0) {
      eligible = alpha(i) > eps_pos && alpha(i) < problem.cost.positive - eps_pos;
    } else {
      const double s = group_sum[problem.group[i]];
      eligible = alpha(i) > eps_neg && s > eps_neg &&
                 s < problem.cost.negative - eps_neg;
    }
    if (!eligible) continue;
    // Y (f + b) = 1 with Y = +-1  =>  b = Y - f.
    sum += problem.labels[i] - f(i);
    ++result.num_eligible;
  }
  if (result.num_eligible > 0) {
    result.bias = sum / result.num_eligible;
    return result;
  }
  double max_neg = -std::numeric_limits<double>::infinity();
  double min_pos = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (problem.labels[i] > 0) {
      min_pos = std::min(min_pos, f(i));
    } else {
      max_neg = std::max(max_neg, f(i));
    }
  }
  result.fallback = true;
  result.bias = -(max_neg + min_pos) / 2.0;
  return result;
}

}  // namespace mismm
