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

#ifndef MISMM_KERNELS_H_
#define MISMM_KERNELS_H_

#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "mismm/data.h"

namespace mismm {

enum class KernelKind { kGaussian, kLinear };

// Embedding kernel k on sample vectors. Gaussian:
// k(x, z) = exp(-|x - z|^2 / (2 sigma^2)); linear: <x, z>.
struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  double sigma = 1.0;  // gaussian only

  static KernelSpec Gaussian(double sigma) {
    return {KernelKind::kGaussian, sigma};
  }
  static KernelSpec Linear() { return {KernelKind::kLinear, 1.0}; }

  void Validate() const;
  std::string ToString() const;
};

double EmbedKernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   const KernelSpec& spec);

// k evaluated between every row of `a` and every row of `b`.
Eigen::MatrixXd KernelMatrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b,
                             const KernelSpec& spec);

// Empirical SMM kernel: the mean of k over all cross pairs of samples.
double SmmKernel(const Eigen::Ref<const Eigen::MatrixXd>& a,
                 const Eigen::Ref<const Eigen::MatrixXd>& b,
                 const KernelSpec& spec);
double SmmKernel(const DistInstance& a, const DistInstance& b,
                 const KernelSpec& spec);

struct GramMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;
};

// Symmetric matrix of SmmKernel values; each unordered pair is evaluated
// once and mirrored.
GramMatrix ComputeGram(std::span<const DistInstance> instances,
                       const KernelSpec& spec);

// rows x cols matrix of SmmKernel(rows[i], cols[j]).
Eigen::MatrixXd CrossGram(std::span<const DistInstance> rows,
                          std::span<const DistInstance> cols,
                          const KernelSpec& spec);

void WriteGramCsv(const GramMatrix& gram, std::ostream& out);

}  // namespace mismm

#endif  // MISMM_KERNELS_H_
