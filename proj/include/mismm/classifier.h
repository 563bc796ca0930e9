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

#ifndef MISMM_CLASSIFIER_H_
#define MISMM_CLASSIFIER_H_

#include <span>
#include <vector>

#include "mismm/data.h"

namespace mismm {

// Instance-level decision function h(P). Bag scores are max-aggregated.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual double ScoreInstance(const DistInstance& instance) const = 0;

  // Scores of many instances; order matches the input.
  virtual std::vector<double> ScoreInstances(
      std::span<const DistInstance> instances) const;
};

}  // namespace mismm

#endif  // MISMM_CLASSIFIER_H_
