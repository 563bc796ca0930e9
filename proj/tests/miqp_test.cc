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

#include "mismm/errors.h"
#include "mismm/heuristic.h"
#include "mismm/miqp.h"
#include "test_util.h"

namespace mismm {
namespace {

// Random features for 1-3 positive bags of 1-3 instances and up to 6
// negative instances.
MiqpProblem TinyProblem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(1, 3);
  std::normal_distribution<double> normal;
  MiqpProblem p;
  const int dim = 1 + small(rng);
  int row = 0;
  const int npos = small(rng);
  for (int q = 0; q < npos; ++q) {
    Bag b{"p" + std::to_string(q), {}, 1};
    for (int k = small(rng); k > 0; --k) b.instances.push_back(row++);
    p.bags.push_back(b);
  }
  int negatives = 1 + static_cast<int>(rng() % 6);
  for (int q = 0; negatives > 0; ++q) {
    Bag b{"n" + std::to_string(q), {}, -1};
    for (int k = std::min(negatives, small(rng)); k > 0; --k, --negatives) {
      b.instances.push_back(row++);
    }
    p.bags.push_back(b);
  }
  p.features.resize(row, dim);
  for (int i = 0; i < p.features.size(); ++i) p.features.data()[i] = 1.5 * normal(rng);
  p.cost = CostWeights{0.5 + std::abs(normal(rng)), 0.5 + std::abs(normal(rng))};
  return p;
}

TEST(BranchAndBound, MatchesEnumerationOnTinyProblems) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 60; ++t) {
    const MiqpProblem p = TinyProblem(rng);
    BranchTrace trace;
    const MiqpSolution s = BranchAndBound(p, &trace);
    const SelectorOptimum e = EnumerateSelectors(p.features, p.bags, p.cost);
    EXPECT_EQ(s.status, MiqpStatus::kOptimal);
    EXPECT_NEAR(s.objective, e.objective, 1e-6) << "t=" << t;
    EXPECT_NEAR(s.objective, PrimalObjective(s.w, s.b, p.features, p.bags, p.cost),
                1e-9);
    EXPECT_EQ(s.gap, 0.0);
    EXPECT_EQ(s.lower_bound, s.objective);
    for (const auto& [parent, child] : trace.parent_child_bounds) {
      EXPECT_GE(child, parent - 1e-9);
    }
  }
}

TEST(BranchAndBound, SolutionSatisfiesConstraints) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 40; ++t) {
    const MiqpProblem p = TinyProblem(rng);
    const MiqpSolution s = BranchAndBound(p);
    std::size_t q = 0;
    for (std::size_t b = 0; b < p.bags.size(); ++b) {
      const Bag& bag = p.bags[b];
      EXPECT_GE(s.xi(b), 0.0);
      double best = -1e300;
      for (std::size_t k = 0; k < bag.instances.size(); ++k) {
        const double f = p.features.row(bag.instances[k]).dot(s.w) + s.b;
        best = std::max(best, f);
        if (bag.label < 0) {
          EXPECT_LE(f, -1.0 + s.xi(b) + 1e-8);
        } else {
          const int z = s.zeta[q][k];
          EXPECT_TRUE(z == 0 || z == 1);
          EXPECT_GE(f, 1.0 - s.xi(b) - p.big_l * z - 1e-8);
        }
      }
      if (bag.label > 0) {
        int sum = 0;
        bool witness = false;
        for (std::size_t k = 0; k < bag.instances.size(); ++k) {
          sum += s.zeta[q][k];
          const double f = p.features.row(bag.instances[k]).dot(s.w) + s.b;
          witness |= s.zeta[q][k] == 0 && f >= 1.0 - s.xi(b) - 1e-8;
        }
        EXPECT_LE(sum, static_cast<int>(bag.instances.size()) - 1);
        EXPECT_TRUE(witness);
        EXPECT_GE(best, 1.0 - s.xi(b) - 1e-8);
        ++q;
      }
    }
  }
}

TEST(BranchAndBound, DoublingLKeepsObjective) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    MiqpProblem p = TinyProblem(rng);
    const double a = BranchAndBound(p).objective;
    p.big_l *= 2;
    EXPECT_NEAR(BranchAndBound(p).objective, a, 1e-6);
  }
}

TEST(BranchAndBound, TwoInstanceBag) {
  MiqpProblem p;
  p.features.resize(3, 1);
  p.features << 2.0, -1.0, 0.5;
  p.bags = {Bag{"P", {0, 1}, 1}, Bag{"N", {2}, -1}};
  p.cost = CostWeights::Uniform(1.0);
  const MiqpSolution s = BranchAndBound(p);
  EXPECT_LE(s.nodes, 3);
  const SelectorOptimum e = EnumerateSelectors(p.features, p.bags, p.cost);
  EXPECT_EQ(e.problems_solved, 2);
  EXPECT_NEAR(s.objective, e.objective, 1e-8);
}

TEST(BranchAndBound, SingletonPositiveBagsSolveAtRoot) {
  std::mt19937_64 rng(4);
  const Dataset ds = testing::RandomDataset(rng, 3, 3, 1, 1, 2);
  MiqpProblem p;
  p.features.resize(ds.num_instances(), 2);
  for (int i = 0; i < ds.num_instances(); ++i) {
    p.features.row(i) = ds.instance(i).samples().row(0);
  }
  p.bags = ds.bags();
  const MiqpSolution s = BranchAndBound(p);
  EXPECT_EQ(s.nodes, 1);
  EXPECT_EQ(s.status, MiqpStatus::kOptimal);
}

TEST(BranchAndBound, TimeLimitReturnsIncumbent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  MiqpProblem p;
  const int dim = 6;
  int row = 0;
  for (int q = 0; q < 25; ++q) {
    Bag b{"p" + std::to_string(q), {}, 1};
    for (int k = 0; k < 5; ++k) b.instances.push_back(row++);
    p.bags.push_back(b);
  }
  for (int q = 0; q < 15; ++q) {
    Bag b{"n" + std::to_string(q), {}, -1};
    for (int k = 0; k < 2; ++k) b.instances.push_back(row++);
    p.bags.push_back(b);
  }
  p.features.resize(row, dim);
  for (int i = 0; i < p.features.size(); ++i) p.features.data()[i] = normal(rng);
  p.time_limit = 0.01;
  const MiqpSolution s = BranchAndBound(p);
  EXPECT_EQ(s.status, MiqpStatus::kTimeLimit);
  EXPECT_TRUE(std::isfinite(s.objective));
  EXPECT_GE(s.gap, 0.0);
  EXPECT_LE(s.lower_bound, s.objective);
  EXPECT_NEAR(s.objective, PrimalObjective(s.w, s.b, p.features, p.bags, p.cost),
              1e-8);
}

TEST(EnumerateSelectors, CountsAndGuard) {
  MiqpProblem p;
  p.features = Eigen::MatrixXd::Random(6, 2);
  p.bags = {Bag{"a", {0, 1}, 1}, Bag{"b", {2, 3}, 1}, Bag{"n", {4, 5}, -1}};
  EXPECT_EQ(EnumerateSelectors(p.features, p.bags, p.cost).problems_solved, 4);
  Eigen::MatrixXd big = Eigen::MatrixXd::Random(50, 2);
  std::vector<Bag> bags;
  for (int q = 0; q < 7; ++q) {
    Bag b{"p", {}, 1};
    for (int k = 0; k < 5; ++k) b.instances.push_back(q * 5 + k);
    bags.push_back(b);
  }
  bags.push_back(Bag{"n", {35}, -1});
  EXPECT_THROW(EnumerateSelectors(big, bags, p.cost), DataError);
}

TEST(FitMiqp, SingletonPositivesMatchDual) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    const Dataset ds = testing::RandomDataset(rng, 3, 3, 1, 4, 2);
    MiqpConfig cfg;
    cfg.kernel = KernelSpec::Gaussian(1.0);
    cfg.m2 = ds.num_samples();
    const MiqpFit fit = FitMiqp(ds, cfg);
    const Eigen::MatrixXd gram = fit.embeddings * fit.embeddings.transpose();
    std::vector<int> selector, effective;
    for (const Bag& b : ds.bags()) {
      if (b.label > 0) selector.push_back(b.instances[0]);
    }
    const DualSolution d =
        SolveDual(BuildDualProblem(ds, gram, selector, cfg.cost, &effective));
    EXPECT_NEAR(fit.model.solution.objective, d.objective, 1e-5);
  }
}

TEST(FitMiqp, ObjectiveMatchesOracleAndBoundsHeuristic) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const Dataset ds = testing::RandomDataset(rng, 1 + t % 3, 2, 3, 3, 2, 0.5);
    MiqpConfig cfg;
    cfg.kernel = KernelSpec::Gaussian(1.0);
    const MiqpFit fit = FitMiqp(ds, cfg);
    const SelectorOptimum e =
        EnumerateSelectors(fit.embeddings, ds.bags(), cfg.cost);
    EXPECT_NEAR(fit.model.solution.objective, e.objective, 1e-6);
    EXPECT_EQ(fit.model.solution.status, MiqpStatus::kOptimal);
    EXPECT_TRUE(std::isfinite(fit.model.big_l_shift));
    EXPECT_LE(std::abs(fit.model.big_l_shift), 1e-6);

    const Dataset emb = testing::SingletonDataset(fit.embeddings, ds.bags());
    HeuristicConfig hc;
    hc.cost = cfg.cost;
    hc.kernel = KernelSpec::Linear();
    const DualModel h = FitHeuristic(emb, hc);
    EXPECT_GE(PrimalObjective(h, emb, hc.cost), e.objective - 1e-8);
  }
}

TEST(PrimalModel, Scoring) {
  std::mt19937_64 rng(8);
  const Dataset ds = testing::RandomDataset(rng, 2, 2, 3, 4, 2);
  MiqpConfig cfg;
  cfg.kernel = KernelSpec::Gaussian(1.0);
  const MiqpFit fit = FitMiqp(ds, cfg);
  for (int i = 0; i < ds.num_instances(); ++i) {
    const Eigen::VectorXd z = fit.model.map().Embed(ds.instance(i));
    EXPECT_LE((z - fit.embeddings.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
  const std::vector<double> scores = fit.model.ScoreInstances(ds.instances());
  const std::vector<double> bags = BagScores(ds, scores);
  for (int b = 0; b < ds.num_bags(); ++b) {
    double best = -1e300;
    for (int i : ds.bag(b).instances) best = std::max(best, scores[i]);
    EXPECT_EQ(bags[b], best);
  }
  const PrimalModel zero(fit.model.map(),
                         Eigen::VectorXd::Zero(fit.model.map().rank()), 0.25);
  EXPECT_EQ(zero.ScoreInstance(ds.instance(0)), 0.25);
}

}  // namespace
}  // namespace mismm
