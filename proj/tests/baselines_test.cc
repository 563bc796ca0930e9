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

#include <gtest/gtest.h>

#include "mismm/baselines.h"
#include "mismm/errors.h"
#include "mismm/eval.h"
#include "mismm/simgen.h"
#include "test_util.h"

namespace mismm {
namespace {

TEST(SummarySpec, Dimensions) {
  EXPECT_EQ(SummarySpec::Parse("univ1").Dimension(10), 20);
  EXPECT_EQ(SummarySpec::Parse("univ1,univ2").Dimension(10), 60);
  EXPECT_EQ(SummarySpec::Parse("univ1,cor").Dimension(10), 65);
  EXPECT_EQ(SummarySpec::Parse("univ1,univ2,cor").Dimension(10), 105);
  EXPECT_EQ(SummarySpec::Parse("univ1,univ2,cor").ToString(), "univ1,univ2,cor");
  EXPECT_THROW(SummarySpec::Parse("univ2"), DataError);
  EXPECT_THROW(SummarySpec::Parse("univ1,foo"), DataError);
}

TEST(Summarize, MeanAndSd) {
  const DistInstance inst("a", Eigen::Vector3d(1, 2, 3));
  const Eigen::VectorXd s = Summarize(inst, SummarySpec{});
  ASSERT_EQ(s.size(), 2);
  EXPECT_DOUBLE_EQ(s(0), 2.0);
  EXPECT_DOUBLE_EQ(s(1), 1.0);
}

TEST(Summarize, QuartilesType7) {
  EXPECT_DOUBLE_EQ(QuantileType7({0, 0, 0, 4}, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(QuantileType7({0, 0, 0, 4}, 0.75), 1.0);
  EXPECT_DOUBLE_EQ(QuantileType7({3, 1, 2}, 0.5), 2.0);
  const DistInstance inst("a", Eigen::Vector4d(0, 4, 0, 0));
  SummarySpec spec;
  spec.univ2 = true;
  const Eigen::VectorXd s = Summarize(inst, spec);
  EXPECT_DOUBLE_EQ(s(4), 0.0);  // q25
  EXPECT_DOUBLE_EQ(s(5), 1.0);  // q75
}

TEST(Summarize, SkewAndKurtosisByHand) {
  const Eigen::VectorXd x = (Eigen::VectorXd(5) << 1, 2, 3, 4, 10).finished();
  const double mean = 4.0;
  double m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < 5; ++i) {
    const double c = x(i) - mean;
    m2 += c * c / 5;
    m3 += c * c * c / 5;
    m4 += c * c * c * c / 5;
  }
  SummarySpec spec;
  spec.univ2 = true;
  const Eigen::VectorXd s = Summarize(DistInstance("a", x), spec);
  EXPECT_NEAR(s(2), m3 / std::pow(m2, 1.5), 1e-12);
  EXPECT_NEAR(s(3), m4 / (m2 * m2), 1e-12);
}

TEST(Summarize, CorrelationAndConstantColumns) {
  Eigen::MatrixXd x(4, 3);
  x << 1, 2, 5, 2, 4, 5, 3, 6, 5, 4, 8, 5;
  SummarySpec spec;
  spec.cor = true;
  bool flag = false;
  const Eigen::VectorXd s = Summarize(DistInstance("a", x), spec, &flag);
  ASSERT_EQ(s.size(), 9);
  EXPECT_NEAR(s(6), 1.0, 1e-12);  // cor(1,2)
  EXPECT_EQ(s(7), 0.0);           // cor(1,3), constant column
  EXPECT_EQ(s(8), 0.0);
  EXPECT_TRUE(flag);
  EXPECT_THROW(Summarize(DistInstance("b", Eigen::MatrixXd::Ones(1, 2)), spec),
               DataError);
}

TEST(Summarize, PermutationInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(9, 3);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  Eigen::MatrixXd y = x.colwise().reverse();
  const SummarySpec spec = SummarySpec::Parse("univ1,univ2,cor");
  const Eigen::VectorXd a = Summarize(DistInstance("a", x), spec);
  const Eigen::VectorXd b = Summarize(DistInstance("b", y), spec);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SiSmm, ImputedLabelsAndSingletonEquivalence) {
  std::mt19937_64 rng(2);
  const Dataset ds = testing::RandomDataset(rng, 3, 3, 3, 4, 2);
  const Dataset single = SingleInstanceBags(ds);
  ASSERT_EQ(single.num_bags(), ds.num_instances());
  for (int i = 0; i < ds.num_instances(); ++i) {
    EXPECT_EQ(single.instance_label(i), ds.instance_label(i));
  }
  // All-singleton data: SI-SMM and the heuristic coincide.
  const Dataset base = testing::RandomDataset(rng, 3, 3, 1, 4, 2);
  HeuristicConfig cfg;
  cfg.kernel = KernelSpec::Gaussian(1.0);
  const DualModel a = FitSiSmm(base, cfg.kernel, cfg.cost);
  const DualModel b = FitHeuristic(base, cfg);
  EXPECT_LE((a.alpha() - b.alpha()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(a.bias(), b.bias());
}

TEST(SiSmm, BeatsChanceOnMeanDiff) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ScenarioConfig sc;
    sc.scenario = Scenario::kMeanDiff;
    sc.n_bags = 30;
    sc.samples_per_instance = 30;
    sc.seed = seed;
    const Dataset train = Generate(sc).data;
    sc.n_bags = 200;
    sc.seed = seed + 1000;
    const Dataset test = Generate(sc).data;
    FitOptions opt;
    opt.c = 1.0;
    const TrainedModel m = FitMethod(train, MethodId::Parse("si-smm"), opt);
    std::vector<int> labels;
    for (const Bag& b : test.bags()) labels.push_back(b.label);
    total += Auroc(m.ScoreBags(test), labels);
  }
  EXPECT_GT(total / 10, 0.5);
}

TEST(MiSvm, SingletonKernelIdentity) {
  const Eigen::RowVectorXd a = Eigen::RowVectorXd::LinSpaced(4, 0, 1);
  const Eigen::RowVectorXd b = Eigen::RowVectorXd::LinSpaced(4, 1, -1);
  const KernelSpec spec = KernelSpec::Gaussian(0.7);
  EXPECT_NEAR(SmmKernel(DistInstance("a", a), DistInstance("b", b), spec),
              EmbedKernel(a.transpose(), b.transpose(), spec), 1e-12);
}

TEST(MiSvm, ReportsFeatureCounts) {
  ScenarioConfig sc;
  sc.scenario = Scenario::kCovDiff;
  sc.n_bags = 12;
  sc.samples_per_instance = 20;
  sc.seed = 3;
  const Dataset ds = Generate(sc).data;
  const std::pair<const char*, int> cases[] = {{"mi-svm:univ1", 20},
                                               {"mi-svm:univ1,univ2", 60},
                                               {"mi-svm:univ1,cor", 65},
                                               {"mi-svm:univ1,univ2,cor", 105}};
  for (const auto& [name, dim] : cases) {
    const TrainedModel m = FitMethod(ds, MethodId::Parse(name), FitOptions{});
    EXPECT_EQ(m.num_features(), dim) << name;
    const std::vector<double> s = m.ScoreBags(ds);
    for (double v : s) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(MiSvm, SingletonBagsEqualStandardSvmOnSummaries) {
  std::mt19937_64 rng(4);
  const Dataset ds = testing::RandomDataset(rng, 4, 4, 1, 6, 2, 1.0, 3);
  MiSvmConfig cfg;
  cfg.heuristic.kernel = KernelSpec::Gaussian(1.0);
  const MiSvmModel model = FitMiSvm(ds, cfg);
  const DualModel& inner = std::get<DualModel>(model.inner());
  // Oracle: dual on the standardized summary vectors.
  const Dataset summaries = model.transform().Apply(ds);
  const Eigen::MatrixXd gram =
      ComputeGram(summaries.instances(), cfg.heuristic.kernel).values;
  std::vector<int> selector, effective;
  for (const Bag& b : ds.bags()) {
    if (b.label > 0) selector.push_back(b.instances[0]);
  }
  const DualSolution s = SolveDual(
      BuildDualProblem(summaries, gram, selector, cfg.heuristic.cost, &effective));
  EXPECT_NEAR(inner.objective, s.objective, 1e-6);
  EXPECT_NEAR(inner.bias(), s.bias, 1e-9);
}

}  // namespace
}  // namespace mismm
