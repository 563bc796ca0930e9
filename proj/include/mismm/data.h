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

#ifndef MISMM_DATA_H_
#define MISMM_DATA_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mismm {

// One distributional instance: r samples of dimension d, stored as an r x d
// matrix. Sample order carries no meaning.
class DistInstance {
 public:
  DistInstance(std::string id, Eigen::MatrixXd samples);

  const std::string& id() const { return id_; }
  const Eigen::MatrixXd& samples() const { return samples_; }
  int num_samples() const { return static_cast<int>(samples_.rows()); }
  int dim() const { return static_cast<int>(samples_.cols()); }

 private:
  std::string id_;
  Eigen::MatrixXd samples_;
};

struct Bag {
  std::string id;
  std::vector<int> instances;  // indices into Dataset::instances()
  int label = -1;              // -1 or +1
};

// Instances plus a partition of them into labeled bags. Immutable.
class Dataset {
 public:
  Dataset(std::vector<DistInstance> instances, std::vector<Bag> bags,
          std::vector<std::string> feature_names);

  const std::vector<DistInstance>& instances() const { return instances_; }
  const DistInstance& instance(int i) const { return instances_[i]; }
  const std::vector<Bag>& bags() const { return bags_; }
  const Bag& bag(int b) const { return bags_[b]; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

  int num_instances() const { return static_cast<int>(instances_.size()); }
  int num_bags() const { return static_cast<int>(bags_.size()); }
  int dim() const { return static_cast<int>(feature_names_.size()); }
  int num_samples() const;
  int num_positive_bags() const;
  int num_negative_bags() const { return num_bags() - num_positive_bags(); }
  // Instances that belong to negative bags.
  int num_negative_instances() const;

  // Bag index B(i) of instance i.
  int bag_of(int instance) const { return bag_of_[instance]; }
  int instance_label(int instance) const {
    return bags_[bag_of_[instance]].label;
  }

  // Dataset restricted to the given bags (in the given order); instances
  // are renumbered densely in bag order.
  Dataset SubsetBags(std::span<const int> bag_indices) const;

 private:
  std::vector<DistInstance> instances_;
  std::vector<Bag> bags_;
  std::vector<std::string> feature_names_;
  std::vector<int> bag_of_;
};

// CSV with header `bag_id,bag_label,instance_id,<feature columns...>`, one
// row per sample. Instances are keyed by (bag_id, instance_id) and numbered in
// first-appearance order.
Dataset ReadDatasetCsv(std::istream& in);
Dataset LoadDataset(const std::filesystem::path& path);
void WriteDatasetCsv(const Dataset& ds, std::ostream& out);
void SaveDataset(const Dataset& ds, const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value);

enum class ConstantFeaturePolicy { kError, kDrop };

// Pooled per-feature centering and scaling. Columns listed in `kept` survive
// the transform; dropped columns only appear under kDrop.
struct ScaleParams {
  std::vector<std::string> input_names;
  std::vector<int> kept;
  Eigen::VectorXd mean;  // over kept columns
  Eigen::VectorXd sd;    // sample SD (n-1), > 0
  std::vector<std::string> dropped_names;
};

ScaleParams FitScaler(const Dataset& ds,
                      ConstantFeaturePolicy policy = ConstantFeaturePolicy::kError);
ScaleParams FitScaler(const Eigen::MatrixXd& rows,
                      const std::vector<std::string>& names,
                      ConstantFeaturePolicy policy);
Dataset ApplyScaler(const Dataset& ds, const ScaleParams& params);
Eigen::MatrixXd ApplyScaler(const Eigen::MatrixXd& rows,
                            const ScaleParams& params);

// Replaces the named columns by their natural log. Values must be positive.
Dataset LogTransform(const Dataset& ds, std::span<const std::string> columns);

}  // namespace mismm

#endif  // MISMM_DATA_H_
