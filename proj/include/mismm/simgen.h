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

#ifndef MISMM_SIMGEN_H_
#define MISMM_SIMGEN_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mismm/data.h"

namespace mismm {

// Name of the generator behind every seeded stream in the library.
inline constexpr const char* kRngName = "mt19937_64";

enum class Scenario { kTVsNormal, kCovDiff, kMeanDiff, kLargeCovDiff };

// t_vs_normal, cov_diff, mean_diff, large_cov_diff
std::string ToString(Scenario scenario);
Scenario ParseScenario(const std::string& name);

inline constexpr int kSimulationDim = 10;

struct ScenarioConfig {
  Scenario scenario = Scenario::kMeanDiff;
  int n_bags = 20;
  int instances_per_bag = 3;
  int samples_per_instance = 50;
  double p_pos = 0.15;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct LabeledDataset {
  Dataset data;
  std::vector<int> instance_labels;  // hidden y_i in {-1, +1}
};

// n draws from N(mean, cov) via the symmetric square root of cov.
Eigen::MatrixXd SampleMvn(const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& cov, int n,
                          std::mt19937_64& rng);

// n draws of delta + N(0, sigma) / sqrt(chi2_nu / nu), covariance
// nu / (nu - 2) * sigma.
Eigen::MatrixXd SampleMvt(int nu, const Eigen::VectorXd& delta,
                          const Eigen::MatrixXd& sigma, int n,
                          std::mt19937_64& rng);

LabeledDataset Generate(const ScenarioConfig& config);

// JSON with the generator settings and the hidden instance labels.
void WriteLabelSidecar(const LabeledDataset& ld, const ScenarioConfig& config,
                       std::ostream& out);

}  // namespace mismm

#endif  // MISMM_SIMGEN_H_
