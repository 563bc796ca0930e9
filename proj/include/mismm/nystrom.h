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

#ifndef MISMM_NYSTROM_H_
#define MISMM_NYSTROM_H_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "mismm/data.h"
#include "mismm/kernels.h"

namespace mismm {

// Draws m2 anchor samples, allocating them round-robin over bags (a bag drops
// out once its samples are exhausted) and uniformly without replacement
// within each bag. Rows come out grouped by bag, in bag order.
Eigen::MatrixXd StratifiedSubsample(const Dataset& ds, int m2,
                                    std::mt19937_64& rng);

// Per-bag anchor counts used by StratifiedSubsample.
std::vector<int> StratifiedAllocation(const std::vector<int>& bag_sizes,
                                      int m2);

// Nystrom feature map phi(x) = D^{-1/2} V^T (k(x, a_1), ..., k(x, a_m2))^T
// built from the leading eigenpairs of the anchor kernel matrix.
class NystromMap {
 public:
  NystromMap() = default;
  NystromMap(Eigen::MatrixXd anchors, Eigen::MatrixXd projection,
             Eigen::VectorXd eigenvalues, KernelSpec spec, int requested_rank);

  const Eigen::MatrixXd& anchors() const { return anchors_; }
  // rank x m2
  const Eigen::MatrixXd& projection() const { return projection_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const KernelSpec& spec() const { return spec_; }
  int rank() const { return static_cast<int>(projection_.rows()); }
  int requested_rank() const { return requested_rank_; }
  int num_anchors() const { return static_cast<int>(anchors_.rows()); }
  int dim() const { return static_cast<int>(anchors_.cols()); }

  // One feature vector per row of `samples` (returned as rows).
  Eigen::MatrixXd FeatureMap(const Eigen::Ref<const Eigen::MatrixXd>& samples) const;
  // Mean feature vector z of an instance.
  Eigen::VectorXd Embed(const DistInstance& instance) const;
  // n x rank matrix of instance embeddings.
  Eigen::MatrixXd EmbedAll(std::span<const DistInstance> instances) const;

 private:
  Eigen::MatrixXd anchors_;
  Eigen::MatrixXd projection_;
  Eigen::VectorXd eigenvalues_;
  KernelSpec spec_;
  int requested_rank_ = 0;
};

// Eigenpairs with eigenvalue <= kEigenTolerance * largest are dropped, which
// lowers the rank below m1 when the anchor kernel matrix is rank deficient.
inline constexpr double kEigenTolerance = 1e-10;

NystromMap FitNystrom(const Eigen::MatrixXd& anchors, const KernelSpec& spec,
                      int m1);

}  // namespace mismm

#endif  // MISMM_NYSTROM_H_
