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

#ifndef MISMM_DUAL_H_
#define MISMM_DUAL_H_

#include <vector>

#include <Eigen/Dense>

namespace mismm {

// Misclassification cost per class. Positive-bag slacks are charged
// `positive`, negative-bag slacks `negative`.
struct CostWeights {
  double positive = 1.0;
  double negative = 1.0;

  static CostWeights Uniform(double c) { return {c, c}; }
  double ForLabel(int label) const { return label > 0 ? positive : negative; }
  void Validate() const;
};

// Fixed-selector dual over the effective set E:
//
//   max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
//   s.t. sum_i a_i y_i = 0,  a_i >= 0,
//        a_i <= C+ for every selected positive instance,
//        sum_{i in I} a_i <= C- for every negative bag I.
struct DualProblem {
  Eigen::MatrixXd gram;     // |E| x |E|
  std::vector<int> labels;  // Y_{B(i)} per effective instance
  // Negative-bag group per effective instance, -1 for positive instances.
  std::vector<int> group;
  int num_groups = 0;
  CostWeights cost;

  int size() const { return static_cast<int>(labels.size()); }
  void Validate() const;
};

struct BiasResult {
  double bias = 0.0;
  // True when no strict-interior instance existed and the midpoint rule
  // between the extreme bias-free scores of each class was used instead.
  bool fallback = false;
  int num_eligible = 0;
};

struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool bias_fallback = false;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

inline constexpr double kDefaultDualTolerance = 1e-6;

// Throws SolverError if the KKT residual cannot be brought below `tol`.
DualSolution SolveDual(const DualProblem& problem,
                       double tol = kDefaultDualTolerance);

// Averages b over every equation Y_i (sum_j a_j Y_j K_ij + b) = 1 whose
// instance is strictly inside its bound: 0 < a_i < C+ for positive
// instances, 0 < a_i and 0 < sum_{B(i)} a < C- for negative ones.
BiasResult ComputeBias(const DualProblem& problem, const Eigen::VectorXd& alpha);

double DualObjective(const DualProblem& problem, const Eigen::VectorXd& alpha);

}  // namespace mismm

#endif  // MISMM_DUAL_H_
