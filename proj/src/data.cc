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

#include "mismm/data.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "mismm/errors.h"

namespace mismm {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

double ParseNumber(const std::string& text, int line_no) {
  const std::string t = Trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || t.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" +
                    t + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": non-finite value");
  }
  return value;
}

int ParseLabel(const std::string& text, int line_no) {
  const std::string t = Trim(text);
  if (t == "1" || t == "+1") return 1;
  if (t == "-1") return -1;
  throw DataError("line " + std::to_string(line_no) + ": bag label '" + t +
                  "' is not 1/-1");
}

}  // namespace

DistInstance::DistInstance(std::string id, Eigen::MatrixXd samples)
    : id_(std::move(id)), samples_(std::move(samples)) {
  if (samples_.rows() < 1) throw DataError("instance '" + id_ + "' is empty");
  if (samples_.cols() < 1) {
    throw DataError("instance '" + id_ + "' has zero dimension");
  }
  if (!samples_.allFinite()) {
    throw DataError("instance '" + id_ + "' has a non-finite value");
  }
}

Dataset::Dataset(std::vector<DistInstance> instances, std::vector<Bag> bags,
                 std::vector<std::string> feature_names)
    : instances_(std::move(instances)),
      bags_(std::move(bags)),
      feature_names_(std::move(feature_names)),
      bag_of_(instances_.size(), -1) {
  if (instances_.empty()) throw DataError("no samples");
  for (const auto& inst : instances_) {
    if (inst.dim() != dim()) {
      throw DataError("instance '" + inst.id() + "' has dimension " +
                      std::to_string(inst.dim()) + ", expected " +
                      std::to_string(dim()));
    }
  }
  for (int b = 0; b < num_bags(); ++b) {
    const Bag& bag = bags_[b];
    if (bag.label != 1 && bag.label != -1) {
      throw DataError("bag '" + bag.id + "' label must be -1 or +1");
    }
    if (bag.instances.empty()) throw DataError("bag '" + bag.id + "' is empty");
    for (int i : bag.instances) {
      if (i < 0 || i >= num_instances()) {
        throw DataError("bag '" + bag.id + "' references a missing instance");
      }
      if (bag_of_[i] != -1) {
        throw DataError("instance " + std::to_string(i) +
                        " belongs to more than one bag");
      }
      bag_of_[i] = b;
    }
  }
  for (int i = 0; i < num_instances(); ++i) {
    if (bag_of_[i] == -1) {
      throw DataError("instance '" + instances_[i].id() + "' has no bag");
    }
  }
}

int Dataset::num_samples() const {
  int total = 0;
  for (const auto& inst : instances_) total += inst.num_samples();
  return total;
}

int Dataset::num_positive_bags() const {
  int count = 0;
  for (const auto& bag : bags_) count += bag.label == 1;
  return count;
}

int Dataset::num_negative_instances() const {
  int count = 0;
  for (const auto& bag : bags_) {
    if (bag.label == -1) count += static_cast<int>(bag.instances.size());
  }
  return count;
}

Dataset Dataset::SubsetBags(std::span<const int> bag_indices) const {
  std::vector<DistInstance> instances;
  std::vector<Bag> bags;
  for (int b : bag_indices) {
    Bag bag = bags_.at(b);
    for (int& i : bag.instances) {
      instances.push_back(instances_[i]);
      i = static_cast<int>(instances.size()) - 1;
    }
    bags.push_back(std::move(bag));
  }
  return Dataset(std::move(instances), std::move(bags), feature_names_);
}

Dataset ReadDatasetCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("no samples");
  const std::vector<std::string> header = SplitCsvLine(line);
  int bag_col = -1, label_col = -1, inst_col = -1;
  std::vector<int> feature_cols;
  std::vector<std::string> feature_names;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string name = Trim(header[c]);
    if (name == "bag_id") {
      bag_col = c;
    } else if (name == "bag_label") {
      label_col = c;
    } else if (name == "instance_id") {
      inst_col = c;
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (bag_col < 0) throw DataError("missing column 'bag_id'");
  if (label_col < 0) throw DataError("missing column 'bag_label'");
  if (inst_col < 0) throw DataError("missing column 'instance_id'");
  if (feature_cols.empty()) throw DataError("missing feature columns");

  struct Pending {
    std::string id;
    std::vector<std::vector<double>> rows;
  };
  std::vector<Pending> pending;
  std::vector<Bag> bags;
  std::unordered_map<std::string, int> bag_index;
  std::map<std::pair<int, std::string>, int> inst_index;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    const std::string bag_id = Trim(fields[bag_col]);
    const int label = ParseLabel(fields[label_col], line_no);
    auto [bit, bag_new] =
        bag_index.emplace(bag_id, static_cast<int>(bags.size()));
    if (bag_new) {
      bags.push_back(Bag{bag_id, {}, label});
    } else if (bags[bit->second].label != label) {
      throw DataError("inconsistent bag label for bag '" + bag_id + "'");
    }
    const int b = bit->second;
    const std::string inst_id = Trim(fields[inst_col]);
    auto [iit, inst_new] = inst_index.emplace(
        std::make_pair(b, inst_id), static_cast<int>(pending.size()));
    if (inst_new) {
      pending.push_back(Pending{inst_id, {}});
      bags[b].instances.push_back(iit->second);
    }
    std::vector<double> row(feature_cols.size());
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      row[f] = ParseNumber(fields[feature_cols[f]], line_no);
    }
    pending[iit->second].rows.push_back(std::move(row));
  }
  if (pending.empty()) throw DataError("no samples");

  std::vector<DistInstance> instances;
  instances.reserve(pending.size());
  for (Pending& p : pending) {
    Eigen::MatrixXd samples(p.rows.size(), feature_cols.size());
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      for (std::size_t f = 0; f < feature_cols.size(); ++f) {
        samples(r, f) = p.rows[r][f];
      }
    }
    instances.emplace_back(std::move(p.id), std::move(samples));
  }
  return Dataset(std::move(instances), std::move(bags),
                 std::move(feature_names));
}

Dataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return ReadDatasetCsv(in);
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void WriteDatasetCsv(const Dataset& ds, std::ostream& out) {
  out << "bag_id,bag_label,instance_id";
  for (const auto& name : ds.feature_names()) out << ',' << QuoteCsv(name);
  out << '\n';
  for (const Bag& bag : ds.bags()) {
    const std::string bag_id = QuoteCsv(bag.id);
    const char* label = bag.label == 1 ? "1" : "-1";
    for (int i : bag.instances) {
      const DistInstance& inst = ds.instance(i);
      const std::string inst_id = QuoteCsv(inst.id());
      for (int r = 0; r < inst.num_samples(); ++r) {
        out << bag_id << ',' << label << ',' << inst_id;
        for (int f = 0; f < inst.dim(); ++f) {
          out << ',' << FormatDouble(inst.samples()(r, f));
        }
        out << '\n';
      }
    }
  }
}

void SaveDataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  WriteDatasetCsv(ds, out);
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

ScaleParams FitScaler(const Eigen::MatrixXd& rows,
                      const std::vector<std::string>& names,
                      ConstantFeaturePolicy policy) {
  if (rows.rows() < 2) {
    throw DataError("scaling needs at least 2 samples");
  }
  ScaleParams params;
  params.input_names = names;
  const Eigen::VectorXd mean = rows.colwise().mean();
  std::vector<double> means, sds;
  for (int f = 0; f < rows.cols(); ++f) {
    const double ss = (rows.col(f).array() - mean(f)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(rows.rows() - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean(f))))) {
      if (policy == ConstantFeaturePolicy::kError) {
        throw DataError("feature '" + names[f] +
                        "' has zero variance (use --drop-constant to drop it)");
      }
      std::cerr << "warning: dropping constant feature '" << names[f] << "'\n";
      params.dropped_names.push_back(names[f]);
      continue;
    }
    params.kept.push_back(f);
    means.push_back(mean(f));
    sds.push_back(sd);
  }
  if (params.kept.empty()) throw DataError("every feature is constant");
  params.mean = Eigen::Map<Eigen::VectorXd>(means.data(), means.size());
  params.sd = Eigen::Map<Eigen::VectorXd>(sds.data(), sds.size());
  return params;
}

ScaleParams FitScaler(const Dataset& ds, ConstantFeaturePolicy policy) {
  Eigen::MatrixXd pooled(ds.num_samples(), ds.dim());
  int row = 0;
  for (const auto& inst : ds.instances()) {
    pooled.middleRows(row, inst.num_samples()) = inst.samples();
    row += inst.num_samples();
  }
  return FitScaler(pooled, ds.feature_names(), policy);
}

Eigen::MatrixXd ApplyScaler(const Eigen::MatrixXd& rows,
                            const ScaleParams& params) {
  if (rows.cols() != static_cast<Eigen::Index>(params.input_names.size())) {
    throw DataError("scaler expects " +
                    std::to_string(params.input_names.size()) +
                    " features, data has " + std::to_string(rows.cols()));
  }
  Eigen::MatrixXd out(rows.rows(), params.kept.size());
  for (std::size_t k = 0; k < params.kept.size(); ++k) {
    out.col(k) =
        (rows.col(params.kept[k]).array() - params.mean(k)) / params.sd(k);
  }
  return out;
}

Dataset ApplyScaler(const Dataset& ds, const ScaleParams& params) {
  if (ds.feature_names() != params.input_names) {
    throw DataError("feature columns do not match the fitted scaler");
  }
  std::vector<DistInstance> instances;
  instances.reserve(ds.num_instances());
  for (const auto& inst : ds.instances()) {
    instances.emplace_back(inst.id(), ApplyScaler(inst.samples(), params));
  }
  std::vector<std::string> names;
  for (int f : params.kept) names.push_back(params.input_names[f]);
  return Dataset(std::move(instances), ds.bags(), std::move(names));
}

Dataset LogTransform(const Dataset& ds, std::span<const std::string> columns) {
  std::vector<int> targets;
  for (const auto& name : columns) {
    int found = -1;
    for (int f = 0; f < ds.dim(); ++f) {
      if (ds.feature_names()[f] == name) found = f;
    }
    if (found < 0) throw DataError("log-transform: unknown column '" + name + "'");
    targets.push_back(found);
  }
  std::vector<DistInstance> instances;
  instances.reserve(ds.num_instances());
  for (const auto& inst : ds.instances()) {
    Eigen::MatrixXd samples = inst.samples();
    for (int f : targets) {
      if ((samples.col(f).array() <= 0.0).any()) {
        throw DataError("log-transform: column '" + ds.feature_names()[f] +
                        "' has non-positive values");
      }
      samples.col(f) = samples.col(f).array().log();
    }
    instances.emplace_back(inst.id(), std::move(samples));
  }
  return Dataset(std::move(instances), ds.bags(), ds.feature_names());
}

}  // namespace mismm
