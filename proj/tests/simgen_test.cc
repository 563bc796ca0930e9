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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mismm/errors.h"
#include "mismm/simgen.h"

namespace mismm {
namespace {

Eigen::MatrixXd SampleCov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / (x.rows() - 1);
}

TEST(SampleMvn, ZeroCovarianceGivesMean) {
  std::mt19937_64 rng(1);
  const Eigen::Vector3d mean(1, -2, 3);
  const Eigen::MatrixXd x = SampleMvn(mean, Eigen::Matrix3d::Zero(), 5, rng);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(x.row(i), mean.transpose());
}

TEST(SampleMvn, MomentsAtLargeN) {
  std::mt19937_64 rng(2);
  const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const Eigen::MatrixXd x = SampleMvn(mean, Eigen::MatrixXd::Identity(4, 4), 100000, rng);
  EXPECT_LE((x.colwise().mean().transpose() - mean).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LE((SampleCov(x) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(),
            0.05);
  const Eigen::MatrixXd y =
      SampleMvn(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 4.0), 100000, rng);
  EXPECT_NEAR(std::sqrt(SampleCov(y)(0, 0)), 2.0, 0.04);
}

TEST(SampleMvn, RejectsIndefinite) {
  std::mt19937_64 rng(3);
  Eigen::Matrix2d cov;
  cov << 1, 2, 2, 1;
  EXPECT_THROW(SampleMvn(Eigen::Vector2d::Zero(), cov, 3, rng), DataError);
  cov << 1, 0.5, 0.4, 1;
  EXPECT_THROW(SampleMvn(Eigen::Vector2d::Zero(), cov, 3, rng), DataError);
}

TEST(SampleMvt, CovarianceAndTails) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = SampleMvt(3, Eigen::VectorXd::Zero(5),
                                      Eigen::MatrixXd::Identity(5, 5) / 3.0,
                                      100000, rng);
  EXPECT_LE((SampleCov(x) - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(),
            0.1);
  const Eigen::ArrayXd c = x.col(0).array() - x.col(0).mean();
  const double var = c.square().mean();
  EXPECT_GT(c.square().square().mean(), 3.0 * var * var);
  const Eigen::Vector2d delta(3, -1);
  const Eigen::MatrixXd d = SampleMvt(5, delta, Eigen::Matrix2d::Zero(), 4, rng);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(d.row(i), delta.transpose());
  EXPECT_THROW(SampleMvt(2, delta, Eigen::Matrix2d::Identity(), 1, rng), DataError);
}

TEST(Generate, AssumptionOneAndDeterminism) {
  for (Scenario s : {Scenario::kTVsNormal, Scenario::kCovDiff,
                     Scenario::kMeanDiff, Scenario::kLargeCovDiff}) {
    ScenarioConfig cfg;
    cfg.scenario = s;
    cfg.n_bags = 30;
    cfg.samples_per_instance = 7;
    cfg.seed = 5;
    const LabeledDataset a = Generate(cfg);
    EXPECT_EQ(a.data.num_bags(), 30);
    EXPECT_EQ(a.data.num_instances(), 90);
    EXPECT_EQ(a.data.dim(), kSimulationDim);
    for (const Bag& bag : a.data.bags()) {
      int y = -1;
      for (int i : bag.instances) y = std::max(y, a.instance_labels[i]);
      EXPECT_EQ(bag.label, y);
    }
    const LabeledDataset b = Generate(cfg);
    for (int i = 0; i < a.data.num_instances(); ++i) {
      EXPECT_EQ(a.data.instance(i).samples(), b.data.instance(i).samples());
    }
  }
}

TEST(Generate, NoPositivesWhenProbabilityZero) {
  ScenarioConfig cfg;
  cfg.p_pos = 0.0;
  cfg.n_bags = 50;
  EXPECT_EQ(Generate(cfg).data.num_positive_bags(), 0);
}

TEST(Generate, PositiveBagFraction) {
  ScenarioConfig cfg;
  cfg.n_bags = 2000;
  cfg.samples_per_instance = 1;
  cfg.seed = 6;
  const double frac = Generate(cfg).data.num_positive_bags() / 2000.0;
  EXPECT_NEAR(frac, 1 - std::pow(0.85, 3), 0.03);
}

TEST(Generate, MeanShiftOfPositiveInstances) {
  ScenarioConfig cfg;
  cfg.n_bags = 700;
  cfg.samples_per_instance = 100;
  cfg.seed = 7;
  const LabeledDataset ld = Generate(cfg);
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < ld.data.num_instances() && n < 100000; ++i) {
    if (ld.instance_labels[i] < 0) continue;
    sum += ld.data.instance(i).samples().col(0).sum();
    n += ld.data.instance(i).num_samples();
  }
  ASSERT_GE(n, 10000);
  EXPECT_NEAR(sum / n, 0.2, 0.02);
}

TEST(Generate, TVsNormalSameCovariance) {
  // Pool positive and negative samples of the first five coordinates.
  ScenarioConfig cfg;
  cfg.scenario = Scenario::kTVsNormal;
  cfg.n_bags = 400;
  cfg.samples_per_instance = 100;
  cfg.seed = 8;
  const LabeledDataset ld = Generate(cfg);
  std::vector<Eigen::MatrixXd> pos, neg;
  int npos = 0, nneg = 0;
  for (int i = 0; i < ld.data.num_instances(); ++i) {
    const Eigen::MatrixXd block = ld.data.instance(i).samples().leftCols(5);
    if (ld.instance_labels[i] > 0) {
      pos.push_back(block);
      npos += block.rows();
    } else {
      neg.push_back(block);
      nneg += block.rows();
    }
  }
  auto stack = [](const std::vector<Eigen::MatrixXd>& parts, int rows) {
    Eigen::MatrixXd m(rows, 5);
    int r = 0;
    for (const auto& p : parts) {
      m.middleRows(r, p.rows()) = p;
      r += p.rows();
    }
    return m;
  };
  const Eigen::MatrixXd p = stack(pos, npos), q = stack(neg, nneg);
  ASSERT_GE(npos, 10000);
  EXPECT_LE((SampleCov(p) - SampleCov(q)).cwiseAbs().maxCoeff(), 0.1);
  auto excess_kurtosis = [](const Eigen::VectorXd& v) {
    const Eigen::ArrayXd c = v.array() - v.mean();
    const double m2 = c.square().mean();
    return c.square().square().mean() / (m2 * m2) - 3.0;
  };
  EXPECT_GT(excess_kurtosis(p.col(0)), excess_kurtosis(q.col(0)) + 1.0);
}

TEST(Generate, ScenarioNamesAndSidecar) {
  EXPECT_EQ(ParseScenario("large_cov_diff"), Scenario::kLargeCovDiff);
  EXPECT_THROW(ParseScenario("nope"), DataError);
  ScenarioConfig cfg;
  cfg.n_bags = 2;
  const LabeledDataset ld = Generate(cfg);
  std::ostringstream out;
  WriteLabelSidecar(ld, cfg, out);
  EXPECT_NE(out.str().find("\"rng\": \"mt19937_64\""), std::string::npos);
  EXPECT_NE(out.str().find("\"y\""), std::string::npos);
}

}  // namespace
}  // namespace mismm
