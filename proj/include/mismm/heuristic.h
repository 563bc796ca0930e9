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

#ifndef MISMM_HEURISTIC_H_
#define MISMM_HEURISTIC_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mismm/classifier.h"
#include "mismm/data.h"
#include "mismm/dual.h"
#include "mismm/kernels.h"

namespace mismm {

struct HeuristicConfig {
  CostWeights cost;
  KernelSpec kernel;
  int max_selector_updates = 50;
  int n_restarts = 1;
  std::uint64_t seed = 0;
  double tol = kDefaultDualTolerance;

  void Validate() const;
};

// Result of the selector loop expressed over dataset instance indices.
struct HeuristicFit {
  std::vector<int> support;  // instances of E with alpha > 0
  Eigen::VectorXd alpha;     // aligned with `support`
  std::vector<int> labels;   // Y_{B(i)} aligned with `support`
  double bias = 0.0;
  bool bias_fallback = false;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  // Selected instance per positive bag, in bag order.
  std::vector<int> selector;
  std::vector<std::vector<int>> selector_log;
  int dual_solves = 0;
  int selector_updates = 0;
  bool converged = false;
  int restart = 0;
  double kkt_residual = 0.0;

  // Instance scores h(P_i) for every dataset instance, from a Gram matrix
  // whose rows index the scored instances and columns the training ones.
  Eigen::VectorXd ScoresFromGram(const Eigen::MatrixXd& gram) const;
};

// Trained dual-form classifier h(P) = sum_j a_j Y_j K(P, P_j) + b.
class DualModel : public Classifier {
 public:
  DualModel() = default;
  DualModel(KernelSpec spec, std::vector<DistInstance> supports,
            Eigen::VectorXd alpha, std::vector<int> labels, double bias);

  double ScoreInstance(const DistInstance& instance) const override;
  std::vector<double> ScoreInstances(
      std::span<const DistInstance> instances) const override;

  // 1/2 |w|^2 = 1/2 sum_ij a_i a_j Y_i Y_j K(P_i, P_j).
  double HalfNormSquared() const;

  const KernelSpec& spec() const { return spec_; }
  const std::vector<DistInstance>& supports() const { return supports_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const std::vector<int>& labels() const { return labels_; }
  double bias() const { return bias_; }

  // Training diagnostics.
  double objective = 0.0;
  int dual_solves = 0;
  int selector_updates = 0;
  bool converged = true;
  bool bias_fallback = false;
  std::vector<std::vector<int>> selector_log;

 private:
  KernelSpec spec_;
  std::vector<DistInstance> supports_;
  Eigen::VectorXd alpha_;
  std::vector<int> labels_;
  double bias_ = 0.0;
};

// Builds the fixed-selector dual for `selector` (one instance per positive
// bag, in bag order). `effective` receives the dataset indices of E.
DualProblem BuildDualProblem(const Dataset& ds, const Eigen::MatrixXd& gram,
                             std::span<const int> selector,
                             const CostWeights& cost,
                             std::vector<int>* effective);

// Selector loop on a precomputed instance Gram matrix over `ds`.
HeuristicFit FitHeuristicOnGram(const Dataset& ds, const Eigen::MatrixXd& gram,
                                const HeuristicConfig& config);

DualModel MakeDualModel(const Dataset& ds, const HeuristicFit& fit,
                        const KernelSpec& spec);

DualModel FitHeuristic(const Dataset& ds, const HeuristicConfig& config);

struct BagPrediction {
  int label = -1;
  double score = 0.0;
};

// Bag score is the max instance score; label is +1 iff score > threshold.
BagPrediction PredictBag(const Classifier& model,
                         std::span<const DistInstance> bag,
                         double threshold = 0.0);
BagPrediction PredictBagFromScores(std::span<const double> instance_scores,
                                   double threshold = 0.0);

// Max instance score per bag of `ds`.
std::vector<double> BagScores(const Dataset& ds,
                              std::span<const double> instance_scores);

// 1/2 |w|^2 + sum_I C_I max(0, 1 - Y_I max_{i in I} h(P_i)).
double PrimalObjective(double half_norm_sq,
                       std::span<const double> instance_scores,
                       const Dataset& ds, const CostWeights& cost);
double PrimalObjective(const DualModel& model, const Dataset& ds,
                       const CostWeights& cost);

}  // namespace mismm

#endif  // MISMM_HEURISTIC_H_
