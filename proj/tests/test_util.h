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

#ifndef MISMM_TESTS_TEST_UTIL_H_
#define MISMM_TESTS_TEST_UTIL_H_

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mismm/data.h"
#include "mismm/dual.h"

namespace mismm::testing {

// Random instances with r in [min_samples, max_samples] samples of dimension d;
// positive bags get their samples shifted by `shift` in every coordinate.
Dataset RandomDataset(std::mt19937_64& rng, int positive_bags,
                      int negative_bags, int max_instances, int max_samples,
                      int dim, double shift = 1.0, int min_samples = 1);

// Singleton instances whose only sample is a row of `rows`.
Dataset SingletonDataset(const Eigen::MatrixXd& rows,
                         const std::vector<Bag>& bags);

// O(n^2) pair count, ties counting 1/2.
double PairCountAuroc(std::span<const double> scores, std::span<const int> labels);

// Best dual objective found by a refining grid over the feasible set,
// for problems with at most 4 variables.
double DualGridOracle(const DualProblem& problem);

}  // namespace mismm::testing

#endif  // MISMM_TESTS_TEST_UTIL_H_
