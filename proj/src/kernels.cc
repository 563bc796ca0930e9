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

#include "mismm/kernels.h"

#include <cmath>
#include <ostream>

#include "mismm/errors.h"
#include "mismm/parallel.h"

namespace mismm {
namespace {

void CheckDims(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw DataError("dimension mismatch: " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

// Kernel block between two sample sets with precomputed squared row norms.
Eigen::MatrixXd KernelBlock(const Eigen::Ref<const Eigen::MatrixXd>& a,
                            const Eigen::VectorXd& a_norms,
                            const Eigen::Ref<const Eigen::MatrixXd>& b,
                            const Eigen::VectorXd& b_norms,
                            const KernelSpec& spec) {
  Eigen::MatrixXd cross = a * b.transpose();
  if (spec.kind == KernelKind::kLinear) return cross;
  const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
  Eigen::ArrayXXd dist =
      (-2.0 * cross).array().colwise() + a_norms.array();
  dist.rowwise() += b_norms.transpose().array();
  return (dist.max(0.0) * scale).exp().matrix();
}

// Mean of a kernel block, summed in row-major sample order.
double BlockMean(const Eigen::MatrixXd& block) {
  double sum = 0.0;
  for (Eigen::Index l = 0; l < block.rows(); ++l) {
    for (Eigen::Index m = 0; m < block.cols(); ++m) sum += block(l, m);
  }
  return sum / (static_cast<double>(block.rows()) *
                static_cast<double>(block.cols()));
}

}  // namespace

void KernelSpec::Validate() const {
  if (kind == KernelKind::kGaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw DataError("gaussian kernel needs sigma > 0");
  }
}

std::string KernelSpec::ToString() const {
  if (kind == KernelKind::kLinear) return "linear";
  return "gaussian(sigma=" + FormatDouble(sigma) + ")";
}

double EmbedKernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   const KernelSpec& spec) {
  CheckDims(x.size(), z.size());
  if (spec.kind == KernelKind::kLinear) return x.dot(z);
  return std::exp(-(x - z).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
}

Eigen::MatrixXd KernelMatrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b,
                             const KernelSpec& spec) {
  CheckDims(a.cols(), b.cols());
  return KernelBlock(a, a.rowwise().squaredNorm(), b,
                     b.rowwise().squaredNorm(), spec);
}

double SmmKernel(const Eigen::Ref<const Eigen::MatrixXd>& a,
                 const Eigen::Ref<const Eigen::MatrixXd>& b,
                 const KernelSpec& spec) {
  return BlockMean(KernelMatrix(a, b, spec));
}

double SmmKernel(const DistInstance& a, const DistInstance& b,
                 const KernelSpec& spec) {
  return SmmKernel(a.samples(), b.samples(), spec);
}

GramMatrix ComputeGram(std::span<const DistInstance> instances,
                       const KernelSpec& spec) {
  spec.Validate();
  if (instances.empty()) throw DataError("gram: no instances");
  const std::size_t n = instances.size();
  std::vector<Eigen::VectorXd> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    CheckDims(instances[i].dim(), instances[0].dim());
    norms[i] = instances[i].samples().rowwise().squaredNorm();
  }
  GramMatrix gram{Eigen::MatrixXd(n, n), spec};
  ParallelFor(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      gram.values(i, j) = BlockMean(KernelBlock(instances[i].samples(),
                                                norms[i],
                                                instances[j].samples(),
                                                norms[j], spec));
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram.values(i, j) = gram.values(j, i);
  }
  return gram;
}

Eigen::MatrixXd CrossGram(std::span<const DistInstance> rows,
                          std::span<const DistInstance> cols,
                          const KernelSpec& spec) {
  spec.Validate();
  std::vector<Eigen::VectorXd> col_norms(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    col_norms[j] = cols[j].samples().rowwise().squaredNorm();
  }
  Eigen::MatrixXd out(rows.size(), cols.size());
  ParallelFor(rows.size(), [&](std::size_t i) {
    const Eigen::VectorXd norms = rows[i].samples().rowwise().squaredNorm();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      CheckDims(rows[i].dim(), cols[j].dim());
      out(i, j) = BlockMean(KernelBlock(rows[i].samples(), norms,
                                        cols[j].samples(), col_norms[j], spec));
    }
  });
  return out;
}

void WriteGramCsv(const GramMatrix& gram, std::ostream& out) {
  for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.values.cols(); ++j) {
      if (j > 0) out << ',';
      out << FormatDouble(gram.values(i, j));
    }
    out << '\n';
  }
}

}  // namespace mismm
