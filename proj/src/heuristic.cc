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

#include "mismm/heuristic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "mismm/errors.h"
#include "mismm/parallel.h"

namespace mismm {

std::vector<double> Classifier::ScoreInstances(
    std::span<const DistInstance> instances) const {
  std::vector<double> scores(instances.size());
  ParallelFor(instances.size(),
              [&](std::size_t i) { scores[i] = ScoreInstance(instances[i]); });
  return scores;
}

void HeuristicConfig::Validate() const {
  cost.Validate();
  kernel.Validate();
  if (max_selector_updates < 1) {
    throw DataError("max_selector_updates must be >= 1");
  }
  if (n_restarts < 1) throw DataError("n_restarts must be >= 1");
}

Eigen::VectorXd HeuristicFit::ScoresFromGram(const Eigen::MatrixXd& gram) const {
  Eigen::VectorXd scores = Eigen::VectorXd::Constant(gram.rows(), bias);
  for (std::size_t k = 0; k < support.size(); ++k) {
    scores += (alpha(k) * labels[k]) * gram.col(support[k]);
  }
  return scores;
}

DualModel::DualModel(KernelSpec spec, std::vector<DistInstance> supports,
                     Eigen::VectorXd alpha, std::vector<int> labels,
                     double bias)
    : spec_(spec),
      supports_(std::move(supports)),
      alpha_(std::move(alpha)),
      labels_(std::move(labels)),
      bias_(bias) {
  if (static_cast<Eigen::Index>(supports_.size()) != alpha_.size() ||
      supports_.size() != labels_.size()) {
    throw DataError("dual model: supports, alpha and labels must align");
  }
  if (!std::isfinite(bias_) || !alpha_.allFinite()) {
    throw DataError("dual model: non-finite coefficients");
  }
}

double DualModel::ScoreInstance(const DistInstance& instance) const {
  double score = bias_;
  for (std::size_t j = 0; j < supports_.size(); ++j) {
    score += alpha_(j) * labels_[j] * SmmKernel(instance, supports_[j], spec_);
  }
  return score;
}

std::vector<double> DualModel::ScoreInstances(
    std::span<const DistInstance> instances) const {
  if (supports_.empty()) return std::vector<double>(instances.size(), bias_);
  const Eigen::MatrixXd k = CrossGram(instances, supports_, spec_);
  std::vector<double> scores(instances.size(), bias_);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t j = 0; j < supports_.size(); ++j) {
      scores[i] += alpha_(j) * labels_[j] * k(i, j);
    }
  }
  return scores;
}

double DualModel::HalfNormSquared() const {
  if (supports_.empty()) return 0.0;
  const Eigen::MatrixXd k = ComputeGram(supports_, spec_).values;
  Eigen::VectorXd ya(alpha_.size());
  for (Eigen::Index j = 0; j < alpha_.size(); ++j) ya(j) = alpha_(j) * labels_[j];
  return 0.5 * ya.dot(k * ya);
}

DualProblem BuildDualProblem(const Dataset& ds, const Eigen::MatrixXd& gram,
                             std::span<const int> selector,
                             const CostWeights& cost,
                             std::vector<int>* effective) {
  std::vector<int> chosen(ds.num_bags(), -1);
  std::vector<int> group_of_bag(ds.num_bags(), -1);
  DualProblem problem;
  problem.cost = cost;
  std::size_t next = 0;
  for (int b = 0; b < ds.num_bags(); ++b) {
    if (ds.bag(b).label > 0) {
      if (next >= selector.size()) throw DataError("selector is too short");
      chosen[b] = selector[next++];
      if (ds.bag_of(chosen[b]) != b) {
        throw DataError("selector picks an instance outside its bag");
      }
    } else {
      group_of_bag[b] = problem.num_groups++;
    }
  }
  if (next != selector.size()) throw DataError("selector is too long");
  effective->clear();
  for (int i = 0; i < ds.num_instances(); ++i) {
    const int b = ds.bag_of(i);
    if (ds.bag(b).label < 0 || chosen[b] == i) {
      effective->push_back(i);
      problem.labels.push_back(ds.bag(b).label);
      problem.group.push_back(group_of_bag[b]);
    }
  }
  const int n = static_cast<int>(effective->size());
  problem.gram.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      problem.gram(a, c) = gram((*effective)[a], (*effective)[c]);
    }
  }
  return problem;
}

namespace {

HeuristicFit RunSelectorLoop(const Dataset& ds, const Eigen::MatrixXd& gram,
                             const HeuristicConfig& config,
                             std::vector<int> selector) {
  HeuristicFit fit;
  std::set<std::vector<int>> visited;
  std::vector<int> effective;
  while (true) {
    visited.insert(selector);
    fit.selector_log.push_back(selector);
    const DualProblem problem =
        BuildDualProblem(ds, gram, selector, config.cost, &effective);
    const DualSolution sol = SolveDual(problem, config.tol);
    ++fit.dual_solves;

    fit.support.clear();
    fit.labels.clear();
    std::vector<double> alphas;
    for (std::size_t k = 0; k < effective.size(); ++k) {
      if (sol.alpha(k) > 0.0) {
        fit.support.push_back(effective[k]);
        fit.labels.push_back(problem.labels[k]);
        alphas.push_back(sol.alpha(k));
      }
    }
    fit.alpha = Eigen::Map<Eigen::VectorXd>(alphas.data(), alphas.size());
    fit.bias = sol.bias;
    fit.bias_fallback = sol.bias_fallback;
    fit.dual_objective = sol.objective;
    fit.kkt_residual = sol.kkt_residual;
    fit.selector = selector;

    // Rescore positive-bag instances; argmax with ties to the lowest index.
    const Eigen::VectorXd scores = fit.ScoresFromGram(gram);
    std::vector<int> next;
    for (const Bag& bag : ds.bags()) {
      if (bag.label < 0) continue;
      int best = bag.instances.front();
      for (int i : bag.instances) {
        if (scores(i) > scores(best) || (scores(i) == scores(best) && i < best)) {
          best = i;
        }
      }
      next.push_back(best);
    }
    if (next == selector) {
      fit.converged = true;
      break;
    }
    if (fit.selector_updates >= config.max_selector_updates ||
        visited.count(next) > 0) {
      break;
    }
    selector = std::move(next);
    ++fit.selector_updates;
  }

  const Eigen::VectorXd scores = fit.ScoresFromGram(gram);
  double half_norm = 0.0;
  for (std::size_t a = 0; a < fit.support.size(); ++a) {
    for (std::size_t c = 0; c < fit.support.size(); ++c) {
      half_norm += fit.alpha(a) * fit.alpha(c) * fit.labels[a] * fit.labels[c] *
                   gram(fit.support[a], fit.support[c]);
    }
  }
  fit.primal_objective = PrimalObjective(
      0.5 * half_norm, std::span<const double>(scores.data(), scores.size()),
      ds, config.cost);
  return fit;
}

}  // namespace

HeuristicFit FitHeuristicOnGram(const Dataset& ds, const Eigen::MatrixXd& gram,
                                const HeuristicConfig& config) {
  config.Validate();
  if (ds.num_positive_bags() == 0 || ds.num_negative_bags() == 0) {
    throw DataError("heuristic needs at least one positive and one negative bag");
  }
  if (gram.rows() != ds.num_instances() || gram.cols() != ds.num_instances()) {
    throw DataError("gram matrix does not match the dataset");
  }
  std::vector<HeuristicFit> fits(config.n_restarts);
  ParallelFor(config.n_restarts, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint64_t>(config.seed),
                      static_cast<std::uint64_t>(r)};
    std::mt19937_64 rng(seq);
    std::vector<int> selector;
    for (const Bag& bag : ds.bags()) {
      if (bag.label < 0) continue;
      std::uniform_int_distribution<int> pick(
          0, static_cast<int>(bag.instances.size()) - 1);
      selector.push_back(bag.instances[pick(rng)]);
    }
    fits[r] = RunSelectorLoop(ds, gram, config, std::move(selector));
    fits[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < fits.size(); ++r) {
    if (fits[r].primal_objective < fits[best].primal_objective) best = r;
  }
  return std::move(fits[best]);
}

DualModel MakeDualModel(const Dataset& ds, const HeuristicFit& fit,
                        const KernelSpec& spec) {
  std::vector<DistInstance> supports;
  for (int i : fit.support) supports.push_back(ds.instance(i));
  DualModel model(spec, std::move(supports), fit.alpha, fit.labels, fit.bias);
  model.objective = fit.primal_objective;
  model.dual_solves = fit.dual_solves;
  model.selector_updates = fit.selector_updates;
  model.converged = fit.converged;
  model.bias_fallback = fit.bias_fallback;
  model.selector_log = fit.selector_log;
  return model;
}

DualModel FitHeuristic(const Dataset& ds, const HeuristicConfig& config) {
  config.Validate();
  const GramMatrix gram = ComputeGram(ds.instances(), config.kernel);
  return MakeDualModel(ds, FitHeuristicOnGram(ds, gram.values, config),
                       config.kernel);
}

BagPrediction PredictBagFromScores(std::span<const double> instance_scores,
                                   double threshold) {
  if (instance_scores.empty()) throw DataError("cannot predict an empty bag");
  BagPrediction pred;
  pred.score = *std::max_element(instance_scores.begin(), instance_scores.end());
  pred.label = pred.score > threshold ? 1 : -1;
  return pred;
}

BagPrediction PredictBag(const Classifier& model,
                         std::span<const DistInstance> bag, double threshold) {
  if (bag.empty()) throw DataError("cannot predict an empty bag");
  const std::vector<double> scores = model.ScoreInstances(bag);
  return PredictBagFromScores(scores, threshold);
}

std::vector<double> BagScores(const Dataset& ds,
                              std::span<const double> instance_scores) {
  if (static_cast<int>(instance_scores.size()) != ds.num_instances()) {
    throw DataError("score count does not match the instance count");
  }
  std::vector<double> out;
  out.reserve(ds.num_bags());
  for (const Bag& bag : ds.bags()) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i : bag.instances) best = std::max(best, instance_scores[i]);
    out.push_back(best);
  }
  return out;
}

double PrimalObjective(double half_norm_sq,
                       std::span<const double> instance_scores,
                       const Dataset& ds, const CostWeights& cost) {
  const std::vector<double> bag_scores = BagScores(ds, instance_scores);
  double loss = 0.0;
  for (int b = 0; b < ds.num_bags(); ++b) {
    const int y = ds.bag(b).label;
    loss += cost.ForLabel(y) * std::max(0.0, 1.0 - y * bag_scores[b]);
  }
  return half_norm_sq + loss;
}

double PrimalObjective(const DualModel& model, const Dataset& ds,
                       const CostWeights& cost) {
  const std::vector<double> scores = model.ScoreInstances(ds.instances());
  return PrimalObjective(model.HalfNormSquared(), scores, ds, cost);
}

}  // namespace mismm
