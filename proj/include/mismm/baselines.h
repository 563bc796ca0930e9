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

#ifndef MISMM_BASELINES_H_
#define MISMM_BASELINES_H_

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mismm/classifier.h"
#include "mismm/data.h"
#include "mismm/dual.h"
#include "mismm/heuristic.h"
#include "mismm/kernels.h"
#include "mismm/miqp.h"

namespace mismm {

// Summary statistics per instance. univ1 (mean, SD) is always present.
//   univ1: mean_1..d, sd_1..d
//   univ2: skew_1..d, kurt_1..d, q25_1..d, q75_1..d
//   cor:   cor_{j,k} for j < k in lexicographic order
struct SummarySpec {
  bool univ2 = false;
  bool cor = false;

  int Dimension(int d) const;
  // "univ1", "univ1,univ2", "univ1,cor", "univ1,univ2,cor".
  std::string ToString() const;
  static SummarySpec Parse(const std::string& text);
};

// Quantile by linear interpolation between order statistics (type 7).
double QuantileType7(std::vector<double> values, double p);

// Sample SD uses n-1. Skewness and (non-excess) kurtosis are standardized
// central moments with the 1/n normalization. Statistics of a constant column
// (skew, kurtosis, correlation) are 0 and `constant_flag` is set.
Eigen::VectorXd Summarize(const DistInstance& instance, const SummarySpec& spec,
                          bool* constant_flag = nullptr);

std::vector<std::string> SummaryNames(const std::vector<std::string>& features,
                                      const SummarySpec& spec);

// Summary vectors as standardized single-sample instances.
struct SummaryTransform {
  SummarySpec spec;
  ScaleParams scaler;  // fit on training summaries

  int num_summary_features() const {
    return static_cast<int>(scaler.input_names.size());
  }
  DistInstance Apply(const DistInstance& instance) const;
  Dataset Apply(const Dataset& ds) const;
};

// Raw (unscaled) summary rows, one per instance.
Eigen::MatrixXd SummaryMatrix(const Dataset& ds, const SummarySpec& spec);

SummaryTransform FitSummaryTransform(const Dataset& ds, const SummarySpec& spec);

// Each instance becomes its own bag carrying the label of its original bag.
// Instance order is preserved.
Dataset SingleInstanceBags(const Dataset& ds);

DualModel FitSiSmm(const Dataset& ds, const KernelSpec& kernel,
                   const CostWeights& cost);

enum class MiSvmAlgorithm { kHeuristic, kMiqp };

struct MiSvmConfig {
  SummarySpec summary;
  MiSvmAlgorithm algorithm = MiSvmAlgorithm::kHeuristic;
  HeuristicConfig heuristic;  // used when algorithm == kHeuristic
  MiqpConfig miqp;            // used when algorithm == kMiqp
};

class MiSvmModel : public Classifier {
 public:
  using Inner = std::variant<DualModel, PrimalModel>;

  MiSvmModel() = default;
  MiSvmModel(SummaryTransform transform, Inner inner)
      : transform_(std::move(transform)), inner_(std::move(inner)) {}

  double ScoreInstance(const DistInstance& instance) const override;
  std::vector<double> ScoreInstances(
      std::span<const DistInstance> instances) const override;

  const SummaryTransform& transform() const { return transform_; }
  const Inner& inner() const { return inner_; }
  int num_features() const { return transform_.num_summary_features(); }

 private:
  const Classifier& inner_classifier() const;

  SummaryTransform transform_;
  Inner inner_;
};

MiSvmModel FitMiSvm(const Dataset& ds, const MiSvmConfig& config);

}  // namespace mismm

#endif  // MISMM_BASELINES_H_
