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

#include "mismm/baselines.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "mismm/errors.h"
#include "mismm/parallel.h"

namespace mismm {

int SummarySpec::Dimension(int d) const {
  return 2 * d + (univ2 ? 4 * d : 0) + (cor ? d * (d - 1) / 2 : 0);
}

std::string SummarySpec::ToString() const {
  std::string s = "univ1";
  if (univ2) s += ",univ2";
  if (cor) s += ",cor";
  return s;
}

SummarySpec SummarySpec::Parse(const std::string& text) {
  SummarySpec spec;
  bool has_univ1 = false;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "univ1") {
      has_univ1 = true;
    } else if (part == "univ2" && !spec.univ2) {
      spec.univ2 = true;
    } else if (part == "cor" && !spec.cor) {
      spec.cor = true;
    } else {
      throw DataError("invalid summary spec '" + text + "'");
    }
  }
  if (!has_univ1) {
    throw DataError("summary spec '" + text + "' must include univ1");
  }
  return spec;
}

double QuantileType7(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

Eigen::VectorXd Summarize(const DistInstance& instance, const SummarySpec& spec,
                          bool* constant_flag) {
  const Eigen::MatrixXd& x = instance.samples();
  const int r = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (r < 2) {
    throw DataError("instance '" + instance.id() +
                    "' needs at least 2 samples for summary statistics");
  }
  if (spec.univ2 && r < 3) {
    throw DataError("instance '" + instance.id() +
                    "' needs at least 3 samples for univ2 statistics");
  }
  bool flag = false;
  Eigen::VectorXd out(spec.Dimension(d));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::RowVectorXd ss = centered.colwise().squaredNorm();
  out.head(d) = mean.transpose();
  out.segment(d, d) = (ss.array() / (r - 1)).sqrt().transpose();
  int pos = 2 * d;
  if (spec.univ2) {
    for (int j = 0; j < d; ++j) {
      const Eigen::ArrayXd c = centered.col(j).array();
      const double m2 = ss(j) / r;
      const double m3 = c.cube().mean();
      const double m4 = c.square().square().mean();
      if (m2 > 0.0) {
        out(pos + j) = m3 / std::pow(m2, 1.5);
        out(pos + d + j) = m4 / (m2 * m2);
      } else {
        out(pos + j) = 0.0;
        out(pos + d + j) = 0.0;
        flag = true;
      }
      std::vector<double> col(x.col(j).data(), x.col(j).data() + r);
      out(pos + 2 * d + j) = QuantileType7(col, 0.25);
      out(pos + 3 * d + j) = QuantileType7(std::move(col), 0.75);
    }
    pos += 4 * d;
  }
  if (spec.cor) {
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        const double denom = std::sqrt(ss(j) * ss(k));
        if (denom > 0.0) {
          out(pos) = std::clamp(centered.col(j).dot(centered.col(k)) / denom,
                                -1.0, 1.0);
        } else {
          out(pos) = 0.0;
          flag = true;
        }
        ++pos;
      }
    }
  }
  if (constant_flag != nullptr) *constant_flag = flag;
  return out;
}

std::vector<std::string> SummaryNames(const std::vector<std::string>& features,
                                      const SummarySpec& spec) {
  std::vector<std::string> names;
  auto add = [&](const std::string& prefix) {
    for (const std::string& f : features) names.push_back(prefix + f);
  };
  add("mean_");
  add("sd_");
  if (spec.univ2) {
    add("skew_");
    add("kurt_");
    add("q25_");
    add("q75_");
  }
  if (spec.cor) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      for (std::size_t k = j + 1; k < features.size(); ++k) {
        names.push_back("cor_" + features[j] + "_" + features[k]);
      }
    }
  }
  return names;
}

Eigen::MatrixXd SummaryMatrix(const Dataset& ds, const SummarySpec& spec) {
  const int n = ds.num_instances();
  Eigen::MatrixXd rows(n, spec.Dimension(ds.dim()));
  std::vector<char> flags(n, 0);
  ParallelFor(n, [&](std::size_t i) {
    bool flag = false;
    rows.row(i) = Summarize(ds.instance(i), spec, &flag).transpose();
    flags[i] = flag;
  });
  const auto flagged = std::count(flags.begin(), flags.end(), 1);
  if (flagged > 0) {
    std::cerr << "warning: " << flagged
              << " instance(s) have a constant column; its skew, kurtosis and "
                 "correlation summaries are set to 0\n";
  }
  return rows;
}

SummaryTransform FitSummaryTransform(const Dataset& ds,
                                     const SummarySpec& spec) {
  SummaryTransform t;
  t.spec = spec;
  t.scaler = FitScaler(SummaryMatrix(ds, spec),
                       SummaryNames(ds.feature_names(), spec),
                       ConstantFeaturePolicy::kDrop);
  return t;
}

DistInstance SummaryTransform::Apply(const DistInstance& instance) const {
  const Eigen::MatrixXd row = Summarize(instance, spec).transpose();
  return DistInstance(instance.id(), ApplyScaler(row, scaler));
}

Dataset SummaryTransform::Apply(const Dataset& ds) const {
  const Eigen::MatrixXd rows = ApplyScaler(SummaryMatrix(ds, spec), scaler);
  std::vector<DistInstance> instances;
  instances.reserve(ds.num_instances());
  for (int i = 0; i < ds.num_instances(); ++i) {
    instances.emplace_back(ds.instance(i).id(), rows.row(i));
  }
  std::vector<std::string> names;
  for (int k : scaler.kept) names.push_back(scaler.input_names[k]);
  return Dataset(std::move(instances), ds.bags(), std::move(names));
}

Dataset SingleInstanceBags(const Dataset& ds) {
  std::vector<Bag> bags;
  bags.reserve(ds.num_instances());
  for (int i = 0; i < ds.num_instances(); ++i) {
    const Bag& parent = ds.bag(ds.bag_of(i));
    bags.push_back(Bag{parent.id + "/" + ds.instance(i).id(), {i}, parent.label});
  }
  return Dataset(ds.instances(), std::move(bags), ds.feature_names());
}

DualModel FitSiSmm(const Dataset& ds, const KernelSpec& kernel,
                   const CostWeights& cost) {
  HeuristicConfig config;
  config.cost = cost;
  config.kernel = kernel;
  return FitHeuristic(SingleInstanceBags(ds), config);
}

const Classifier& MiSvmModel::inner_classifier() const {
  return std::visit([](const auto& m) -> const Classifier& { return m; },
                    inner_);
}

double MiSvmModel::ScoreInstance(const DistInstance& instance) const {
  return inner_classifier().ScoreInstance(transform_.Apply(instance));
}

std::vector<double> MiSvmModel::ScoreInstances(
    std::span<const DistInstance> instances) const {
  std::vector<DistInstance> summaries;
  summaries.reserve(instances.size());
  for (const DistInstance& inst : instances) {
    summaries.push_back(transform_.Apply(inst));
  }
  return inner_classifier().ScoreInstances(summaries);
}

MiSvmModel FitMiSvm(const Dataset& ds, const MiSvmConfig& config) {
  SummaryTransform transform = FitSummaryTransform(ds, config.summary);
  const Dataset summaries = transform.Apply(ds);
  if (config.algorithm == MiSvmAlgorithm::kHeuristic) {
    return MiSvmModel(std::move(transform),
                      FitHeuristic(summaries, config.heuristic));
  }
  return MiSvmModel(std::move(transform),
                    std::move(FitMiqp(summaries, config.miqp).model));
}

}  // namespace mismm
