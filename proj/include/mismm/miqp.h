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

#ifndef MISMM_MIQP_H_
#define MISMM_MIQP_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mismm/classifier.h"
#include "mismm/data.h"
#include "mismm/dual.h"
#include "mismm/kernels.h"
#include "mismm/nystrom.h"

namespace mismm {

// Big-L mixed-integer program over explicit instance features z_i:
//
//   min  1/2 |w|^2 + sum_I C_I xi_I
//   s.t. -(<w, z_i> + b) >= 1 - xi_I                  i in I, Y_I = -1
//         <w, z_i> + b   >= 1 - xi_I - L zeta_{I,i}   i in I, Y_I = +1
//         sum_{i in I} zeta_{I,i} <= |I| - 1,  zeta binary,  xi >= 0
struct MiqpProblem {
  Eigen::MatrixXd features;  // one row per instance
  std::vector<Bag> bags;     // instance indices refer to rows of `features`
  CostWeights cost;
  double big_l = 100.0;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();

  int num_binaries() const;
  void Validate() const;
};

enum class MiqpStatus { kOptimal, kTimeLimit, kNodeLimit };
std::string ToString(MiqpStatus status);

struct MiqpSolution {
  Eigen::VectorXd w;
  double b = 0.0;
  // zeta per positive bag (bag order), per instance (bag instance order).
  std::vector<std::vector<int>> zeta;
  Eigen::VectorXd xi;  // per bag, smallest feasible slack
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  // (objective - lower_bound) / max(1, |objective|)
  double gap = std::numeric_limits<double>::infinity();
  MiqpStatus status = MiqpStatus::kOptimal;
  std::int64_t nodes = 0;
  double wall_time = 0.0;
};

// Parent/child relaxation values, recorded for every solved non-root node.
struct BranchTrace {
  std::vector<std::pair<double, double>> parent_child_bounds;
};

// Best-bound branch and bound with depth-first plunging. Relaxations take
// zeta in [0, 1]; the incumbent starts from a rounding of the root.
MiqpSolution BranchAndBound(const MiqpProblem& problem,
                            BranchTrace* trace = nullptr);

// Exact optimum by solving the convex selector problem for every choice of
// one instance per positive bag.
struct SelectorOptimum {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> selector;  // instance index per positive bag
  Eigen::VectorXd w;
  double b = 0.0;
  std::int64_t problems_solved = 0;
};

inline constexpr std::int64_t kMaxEnumeratedSelectors = 10000;

SelectorOptimum EnumerateSelectors(const Eigen::MatrixXd& features,
                                   const std::vector<Bag>& bags,
                                   const CostWeights& cost);

// Primal objective of (w, b) with max-form bag constraints.
double PrimalObjective(const Eigen::VectorXd& w, double b,
                       const Eigen::MatrixXd& features,
                       const std::vector<Bag>& bags, const CostWeights& cost);

// Trained primal-form classifier h(P) = <w, z(P)> + b.
class PrimalModel : public Classifier {
 public:
  PrimalModel() = default;
  PrimalModel(NystromMap map, Eigen::VectorXd w, double b);

  double ScoreInstance(const DistInstance& instance) const override;
  double ScoreEmbedding(const Eigen::VectorXd& z) const { return w_.dot(z) + b_; }

  const NystromMap& map() const { return map_; }
  const Eigen::VectorXd& w() const { return w_; }
  double b() const { return b_; }

  MiqpSolution solution;  // solver metadata
  double big_l = 0.0;
  // Objective change observed when re-solving with 2L; NaN if not checked.
  double big_l_shift = std::numeric_limits<double>::quiet_NaN();

 private:
  NystromMap map_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

struct MiqpConfig {
  KernelSpec kernel;
  CostWeights cost;
  int m1 = 0;  // 0: same as m2
  int m2 = 0;  // 0: min(total samples, 240)
  double big_l = 100.0;
  double time_limit = 60.0;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  std::uint64_t seed = 0;
  // Re-solve with 2L when the first solve is optimal and has at most
  // kBigLCheckMaxBinaries binaries.
  bool check_big_l = true;

  void Validate() const;
};

inline constexpr int kDefaultSubsample = 240;
inline constexpr int kBigLCheckMaxBinaries = 200;

struct MiqpFit {
  PrimalModel model;
  Eigen::MatrixXd embeddings;  // training instance embeddings
};

// Stratified subsample -> Nystrom map -> embeddings -> branch and bound.
MiqpFit FitMiqp(const Dataset& ds, const MiqpConfig& config);

}  // namespace mismm

#endif  // MISMM_MIQP_H_
