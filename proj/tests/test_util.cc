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

#include "test_util.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mismm::testing {

Dataset RandomDataset(std::mt19937_64& rng, int positive_bags,
                      int negative_bags, int max_instances, int max_samples,
                      int dim, double shift, int min_samples) {
  std::uniform_int_distribution<int> ninst(1, max_instances);
  std::uniform_int_distribution<int> nsamp(min_samples, max_samples);
  std::normal_distribution<double> normal;
  std::vector<DistInstance> instances;
  std::vector<Bag> bags;
  for (int b = 0; b < positive_bags + negative_bags; ++b) {
    Bag bag;
    bag.id = "b" + std::to_string(b);
    bag.label = b < positive_bags ? 1 : -1;
    const int k = ninst(rng);
    for (int i = 0; i < k; ++i) {
      Eigen::MatrixXd x(nsamp(rng), dim);
      for (int r = 0; r < x.rows(); ++r) {
        for (int c = 0; c < dim; ++c) x(r, c) = normal(rng);
      }
      if (bag.label > 0 && i == 0) x.array() += shift;
      bag.instances.push_back(static_cast<int>(instances.size()));
      instances.emplace_back(bag.id + "." + std::to_string(i), std::move(x));
    }
    bags.push_back(std::move(bag));
  }
  std::vector<std::string> names;
  for (int c = 0; c < dim; ++c) names.push_back("x" + std::to_string(c));
  return Dataset(std::move(instances), std::move(bags), std::move(names));
}

Dataset SingletonDataset(const Eigen::MatrixXd& rows,
                         const std::vector<Bag>& bags) {
  std::vector<DistInstance> instances;
  for (int i = 0; i < rows.rows(); ++i) {
    instances.emplace_back("i" + std::to_string(i), rows.row(i));
  }
  std::vector<std::string> names;
  for (int c = 0; c < rows.cols(); ++c) names.push_back("z" + std::to_string(c));
  return Dataset(std::move(instances), bags, std::move(names));
}

double PairCountAuroc(std::span<const double> scores,
                      std::span<const int> labels) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != -1) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        num += 1.0;
      } else if (scores[i] == scores[j]) {
        num += 0.5;
      }
    }
  }
  return num / pairs;
}

double DualGridOracle(const DualProblem& p) {
  const int n = p.size();
  const int free = n - 1;
  std::vector<double> ub(n);
  for (int i = 0; i < n; ++i) {
    ub[i] = p.labels[i] > 0 ? p.cost.positive : p.cost.negative;
  }
  auto evaluate = [&](const std::vector<double>& head) {
    Eigen::VectorXd a(n);
    double s = 0.0;
    for (int i = 0; i < free; ++i) {
      a(i) = head[i];
      s += p.labels[i] * head[i];
    }
    a(free) = -p.labels[free] * s;
    if (a(free) < -1e-15 || a(free) > ub[free] + 1e-15) {
      return -std::numeric_limits<double>::infinity();
    }
    a(free) = std::clamp(a(free), 0.0, ub[free]);
    std::vector<double> sums(p.num_groups, 0.0);
    for (int i = 0; i < n; ++i) {
      if (p.group[i] >= 0) sums[p.group[i]] += a(i);
    }
    for (double g : sums) {
      if (g > p.cost.negative + 1e-15) return -std::numeric_limits<double>::infinity();
    }
    return DualObjective(p, a);
  };
  std::vector<double> center(free), half(free);
  for (int i = 0; i < free; ++i) {
    center[i] = ub[i] / 2;
    half[i] = ub[i] / 2;
  }
  double best = evaluate(std::vector<double>(free, 0.0));
  std::vector<double> best_point(free, 0.0);
  for (int level = 0; level < 14; ++level) {
    const int steps = level == 0 ? 60 : 20;
    std::vector<int> idx(free, 0);
    while (true) {
      std::vector<double> x(free);
      for (int i = 0; i < free; ++i) {
        x[i] = std::clamp(center[i] - half[i] + 2 * half[i] * idx[i] / steps,
                          0.0, ub[i]);
      }
      const double v = evaluate(x);
      if (v > best) {
        best = v;
        best_point = x;
      }
      int d = 0;
      while (d < free && ++idx[d] > steps) idx[d++] = 0;
      if (d == free) break;
    }
    for (int i = 0; i < free; ++i) {
      half[i] = 2 * (2 * half[i] / steps);
      center[i] = best_point[i];
    }
  }
  return best;
}

}  // namespace mismm::testing
