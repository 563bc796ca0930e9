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

#include "mismm/nystrom.h"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "mismm/errors.h"
#include "mismm/parallel.h"

namespace mismm {

std::vector<int> StratifiedAllocation(const std::vector<int>& bag_sizes,
                                      int m2) {
  const int total = std::accumulate(bag_sizes.begin(), bag_sizes.end(), 0);
  if (m2 < 1) throw DataError("subsample size must be >= 1");
  if (m2 > total) {
    throw DataError("subsample size " + std::to_string(m2) +
                    " exceeds the " + std::to_string(total) +
                    " available samples");
  }
  std::vector<int> alloc(bag_sizes.size(), 0);
  int remaining = m2;
  while (remaining > 0) {
    for (std::size_t b = 0; b < bag_sizes.size() && remaining > 0; ++b) {
      if (alloc[b] < bag_sizes[b]) {
        ++alloc[b];
        --remaining;
      }
    }
  }
  return alloc;
}

Eigen::MatrixXd StratifiedSubsample(const Dataset& ds, int m2,
                                    std::mt19937_64& rng) {
  std::vector<int> bag_sizes;
  for (const Bag& bag : ds.bags()) {
    int size = 0;
    for (int i : bag.instances) size += ds.instance(i).num_samples();
    bag_sizes.push_back(size);
  }
  const std::vector<int> alloc = StratifiedAllocation(bag_sizes, m2);
  Eigen::MatrixXd anchors(m2, ds.dim());
  int row = 0;
  for (int b = 0; b < ds.num_bags(); ++b) {
    if (alloc[b] == 0) continue;
    // (instance, sample) pairs of this bag in storage order.
    std::vector<std::pair<int, int>> pool;
    for (int i : ds.bag(b).instances) {
      for (int r = 0; r < ds.instance(i).num_samples(); ++r) {
        pool.emplace_back(i, r);
      }
    }
    // Partial Fisher-Yates: the first alloc[b] slots are a uniform draw.
    for (int k = 0; k < alloc[b]; ++k) {
      std::uniform_int_distribution<int> pick(k,
                                              static_cast<int>(pool.size()) - 1);
      std::swap(pool[k], pool[pick(rng)]);
      const auto [i, r] = pool[k];
      anchors.row(row++) = ds.instance(i).samples().row(r);
    }
  }
  return anchors;
}

NystromMap::NystromMap(Eigen::MatrixXd anchors, Eigen::MatrixXd projection,
                       Eigen::VectorXd eigenvalues, KernelSpec spec,
                       int requested_rank)
    : anchors_(std::move(anchors)),
      projection_(std::move(projection)),
      eigenvalues_(std::move(eigenvalues)),
      spec_(spec),
      requested_rank_(requested_rank) {
  if (projection_.cols() != anchors_.rows()) {
    throw DataError("nystrom projection does not match the anchor count");
  }
  if (projection_.rows() < 1) throw DataError("nystrom map has rank 0");
}

Eigen::MatrixXd NystromMap::FeatureMap(
    const Eigen::Ref<const Eigen::MatrixXd>& samples) const {
  if (samples.cols() != anchors_.cols()) {
    throw DataError("dimension mismatch: " + std::to_string(samples.cols()) +
                    " vs " + std::to_string(anchors_.cols()));
  }
  return KernelMatrix(samples, anchors_, spec_) * projection_.transpose();
}

Eigen::VectorXd NystromMap::Embed(const DistInstance& instance) const {
  return FeatureMap(instance.samples()).colwise().mean().transpose();
}

Eigen::MatrixXd NystromMap::EmbedAll(
    std::span<const DistInstance> instances) const {
  Eigen::MatrixXd z(instances.size(), rank());
  ParallelFor(instances.size(), [&](std::size_t i) {
    z.row(i) = Embed(instances[i]).transpose();
  });
  return z;
}

NystromMap FitNystrom(const Eigen::MatrixXd& anchors, const KernelSpec& spec,
                      int m1) {
  spec.Validate();
  const int m2 = static_cast<int>(anchors.rows());
  if (m2 < 1) throw DataError("nystrom: no anchors");
  if (m1 < 1 || m1 > m2) {
    throw DataError("nystrom: rank must satisfy 1 <= m1 <= m2");
  }
  const Eigen::MatrixXd gram = KernelMatrix(anchors, anchors, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw SolverError("nystrom: eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double largest = values(m2 - 1);
  if (!(largest > 0.0)) {
    throw SolverError("nystrom: anchor kernel matrix has no positive eigenvalue");
  }
  int rank = 0;
  while (rank < m1 && values(m2 - 1 - rank) > kEigenTolerance * largest) {
    ++rank;
  }
  Eigen::MatrixXd projection(rank, m2);
  Eigen::VectorXd kept(rank);
  for (int k = 0; k < rank; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(m2 - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    kept(k) = values(m2 - 1 - k);
    projection.row(k) = v.transpose() / std::sqrt(kept(k));
  }
  return NystromMap(anchors, std::move(projection), std::move(kept), spec, m1);
}

}  // namespace mismm
