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

#include "mismm/simgen.h"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "mismm/errors.h"

namespace mismm {

std::string ToString(Scenario scenario) {
  switch (scenario) {
    case Scenario::kTVsNormal:
      return "t_vs_normal";
    case Scenario::kCovDiff:
      return "cov_diff";
    case Scenario::kMeanDiff:
      return "mean_diff";
    case Scenario::kLargeCovDiff:
      return "large_cov_diff";
  }
  return "unknown";
}

Scenario ParseScenario(const std::string& name) {
  for (Scenario s : {Scenario::kTVsNormal, Scenario::kCovDiff,
                     Scenario::kMeanDiff, Scenario::kLargeCovDiff}) {
    if (ToString(s) == name) return s;
  }
  throw DataError("unknown scenario '" + name +
                  "' (expected t_vs_normal, cov_diff, mean_diff or "
                  "large_cov_diff)");
}

void ScenarioConfig::Validate() const {
  if (n_bags < 1) throw DataError("simulate: bags must be >= 1");
  if (instances_per_bag < 1) throw DataError("simulate: instances must be >= 1");
  if (samples_per_instance < 1) throw DataError("simulate: samples must be >= 1");
  if (!(p_pos >= 0.0 && p_pos <= 1.0)) {
    throw DataError("simulate: p_pos must lie in [0, 1]");
  }
}

Eigen::MatrixXd SampleMvn(const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& cov, int n,
                          std::mt19937_64& rng) {
  const int k = static_cast<int>(mean.size());
  if (cov.rows() != k || cov.cols() != k) {
    throw DataError("sample_mvn: covariance shape does not match the mean");
  }
  if (!cov.allFinite() || !(cov - cov.transpose()).isZero(1e-12)) {
    throw DataError("sample_mvn: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.minCoeff() < -1e-10 * scale) {
    throw DataError("sample_mvn: covariance is not positive semidefinite");
  }
  const Eigen::MatrixXd root = eig.eigenvectors() *
                               lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) z(i, j) = normal(rng);
  }
  return (z * root).rowwise() + mean.transpose();
}

Eigen::MatrixXd SampleMvt(int nu, const Eigen::VectorXd& delta,
                          const Eigen::MatrixXd& sigma, int n,
                          std::mt19937_64& rng) {
  if (nu < 3) throw DataError("sample_mvt: nu must be >= 3");
  Eigen::MatrixXd x =
      SampleMvn(Eigen::VectorXd::Zero(delta.size()), sigma, n, rng);
  std::chi_squared_distribution<double> chi2(nu);
  for (int i = 0; i < n; ++i) {
    x.row(i) /= std::sqrt(chi2(rng) / nu);
  }
  return x.rowwise() + delta.transpose();
}

namespace {

Eigen::MatrixXd Equicorrelation(int k, double rho) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, rho);
  m.diagonal().setOnes();
  return m;
}

// Samples of one instance with latent label y.
Eigen::MatrixXd DrawInstance(Scenario scenario, int y, int r,
                             std::mt19937_64& rng) {
  const int d = kSimulationDim;
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(r, d);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  const Eigen::VectorXd zero5 = Eigen::VectorXd::Zero(5);
  switch (scenario) {
    case Scenario::kTVsNormal:
      if (y > 0) {
        x.leftCols(5) = SampleMvt(3, zero5, Eigen::MatrixXd::Identity(5, 5) / 3.0,
                                  r, rng);
      }
      break;
    case Scenario::kCovDiff:
      if (y > 0) {
        x.middleCols(0, 2) =
            SampleMvn(Eigen::VectorXd::Zero(2), Equicorrelation(2, -0.5), r, rng);
      } else {
        x.middleCols(1, 2) =
            SampleMvn(Eigen::VectorXd::Zero(2), Equicorrelation(2, 0.5), r, rng);
      }
      break;
    case Scenario::kMeanDiff:
      if (y > 0) x.leftCols(5).array() += 0.2;
      break;
    case Scenario::kLargeCovDiff:
      if (y > 0) {
        x.leftCols(5) = SampleMvn(zero5, Equicorrelation(5, 0.5), r, rng);
      } else {
        x.middleCols(5, 5) = SampleMvn(zero5, Equicorrelation(5, 0.5), r, rng);
      }
      break;
  }
  return x;
}

}  // namespace

LabeledDataset Generate(const ScenarioConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution coin(config.p_pos);
  std::vector<DistInstance> instances;
  std::vector<Bag> bags;
  std::vector<int> labels;
  for (int b = 0; b < config.n_bags; ++b) {
    Bag bag;
    bag.id = "bag" + std::to_string(b + 1);
    for (int i = 0; i < config.instances_per_bag; ++i) {
      const int y = coin(rng) ? 1 : -1;
      bag.label = std::max(bag.label, y);
      bag.instances.push_back(static_cast<int>(instances.size()));
      instances.emplace_back(
          bag.id + "." + std::to_string(i + 1),
          DrawInstance(config.scenario, y, config.samples_per_instance, rng));
      labels.push_back(y);
    }
    bags.push_back(std::move(bag));
  }
  std::vector<std::string> names;
  for (int j = 0; j < kSimulationDim; ++j) {
    names.push_back("f" + std::to_string(j + 1));
  }
  return LabeledDataset{
      Dataset(std::move(instances), std::move(bags), std::move(names)),
      std::move(labels)};
}

void WriteLabelSidecar(const LabeledDataset& ld, const ScenarioConfig& config,
                       std::ostream& out) {
  nlohmann::ordered_json j;
  j["rng"] = kRngName;
  j["seed"] = config.seed;
  j["scenario"] = ToString(config.scenario);
  j["n_bags"] = config.n_bags;
  j["instances_per_bag"] = config.instances_per_bag;
  j["samples_per_instance"] = config.samples_per_instance;
  j["p_pos"] = config.p_pos;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < ld.data.num_instances(); ++i) {
    rows.push_back({{"bag_id", ld.data.bag(ld.data.bag_of(i)).id},
                    {"instance_id", ld.data.instance(i).id()},
                    {"y", ld.instance_labels[i]}});
  }
  j["instances"] = std::move(rows);
  out << j.dump(2) << "\n";
}

}  // namespace mismm
