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

#include "mismm/model_io.h"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "mismm/errors.h"
#include "mismm/simgen.h"

namespace mismm {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json Num(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

double NumOr(const json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

ordered_json VectorJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFrom(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

ordered_json MatrixJson(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.cols()));
    for (int j = 0; j < m.cols(); ++j) rows.back()[j] = m(i, j);
  }
  return rows;
}

Eigen::MatrixXd MatrixFrom(const json& j, int cols) {
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw DataError("model file: ragged matrix");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

ordered_json KernelJson(const KernelSpec& k) {
  ordered_json j;
  j["kind"] = k.kind == KernelKind::kGaussian ? "gaussian" : "linear";
  j["sigma"] = k.sigma;
  return j;
}

KernelSpec KernelFrom(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  KernelSpec k;
  if (kind == "gaussian") {
    k = KernelSpec::Gaussian(j.at("sigma").get<double>());
  } else if (kind == "linear") {
    k = KernelSpec::Linear();
  } else {
    throw DataError("model file: unknown kernel '" + kind + "'");
  }
  k.Validate();
  return k;
}

ordered_json ScalerJson(const ScaleParams& s) {
  ordered_json j;
  j["input_names"] = s.input_names;
  j["kept"] = s.kept;
  j["mean"] = VectorJson(s.mean);
  j["sd"] = VectorJson(s.sd);
  j["dropped_names"] = s.dropped_names;
  return j;
}

ScaleParams ScalerFrom(const json& j) {
  ScaleParams s;
  s.input_names = j.at("input_names").get<std::vector<std::string>>();
  s.kept = j.at("kept").get<std::vector<int>>();
  s.mean = VectorFrom(j.at("mean"));
  s.sd = VectorFrom(j.at("sd"));
  s.dropped_names = j.at("dropped_names").get<std::vector<std::string>>();
  if (s.mean.size() != static_cast<int>(s.kept.size()) ||
      s.sd.size() != s.mean.size()) {
    throw DataError("model file: inconsistent scaler");
  }
  return s;
}

ordered_json DualJson(const DualModel& m) {
  ordered_json j;
  j["type"] = "dual";
  j["kernel"] = KernelJson(m.spec());
  j["bias"] = m.bias();
  j["alpha"] = VectorJson(m.alpha());
  j["labels"] = m.labels();
  ordered_json supports = ordered_json::array();
  for (const DistInstance& s : m.supports()) {
    supports.push_back({{"id", s.id()}, {"samples", MatrixJson(s.samples())}});
  }
  j["supports"] = std::move(supports);
  j["objective"] = Num(m.objective);
  j["dual_solves"] = m.dual_solves;
  j["selector_updates"] = m.selector_updates;
  j["converged"] = m.converged;
  j["bias_fallback"] = m.bias_fallback;
  return j;
}

DualModel DualFrom(const json& j, int dim) {
  std::vector<DistInstance> supports;
  for (const auto& s : j.at("supports")) {
    supports.emplace_back(s.at("id").get<std::string>(),
                          MatrixFrom(s.at("samples"), dim));
  }
  DualModel m(KernelFrom(j.at("kernel")), std::move(supports),
              VectorFrom(j.at("alpha")), j.at("labels").get<std::vector<int>>(),
              j.at("bias").get<double>());
  m.objective = NumOr(j.at("objective"), 0.0);
  m.dual_solves = j.at("dual_solves").get<int>();
  m.selector_updates = j.at("selector_updates").get<int>();
  m.converged = j.at("converged").get<bool>();
  m.bias_fallback = j.at("bias_fallback").get<bool>();
  return m;
}

ordered_json PrimalJson(const PrimalModel& m) {
  ordered_json j;
  j["type"] = "primal";
  j["kernel"] = KernelJson(m.map().spec());
  j["anchors"] = MatrixJson(m.map().anchors());
  j["projection"] = MatrixJson(m.map().projection());
  j["eigenvalues"] = VectorJson(m.map().eigenvalues());
  j["requested_rank"] = m.map().requested_rank();
  j["w"] = VectorJson(m.w());
  j["b"] = m.b();
  const MiqpSolution& s = m.solution;
  j["solver"] = {{"status", ToString(s.status)},
                 {"objective", Num(s.objective)},
                 {"lower_bound", Num(s.lower_bound)},
                 {"gap", Num(s.gap)},
                 {"nodes", s.nodes},
                 {"wall_time", s.wall_time},
                 {"big_l", m.big_l},
                 {"big_l_shift", Num(m.big_l_shift)}};
  return j;
}

PrimalModel PrimalFrom(const json& j, int dim) {
  const KernelSpec spec = KernelFrom(j.at("kernel"));
  Eigen::MatrixXd anchors = MatrixFrom(j.at("anchors"), dim);
  const int m2 = static_cast<int>(anchors.rows());
  Eigen::MatrixXd projection = MatrixFrom(j.at("projection"), m2);
  NystromMap map(std::move(anchors), std::move(projection),
                 VectorFrom(j.at("eigenvalues")), spec,
                 j.at("requested_rank").get<int>());
  PrimalModel m(std::move(map), VectorFrom(j.at("w")), j.at("b").get<double>());
  const json& s = j.at("solver");
  const std::string status = s.at("status").get<std::string>();
  for (MiqpStatus st : {MiqpStatus::kOptimal, MiqpStatus::kTimeLimit,
                        MiqpStatus::kNodeLimit}) {
    if (ToString(st) == status) m.solution.status = st;
  }
  m.solution.w = m.w();
  m.solution.b = m.b();
  m.solution.objective =
      NumOr(s.at("objective"), std::numeric_limits<double>::infinity());
  m.solution.lower_bound =
      NumOr(s.at("lower_bound"), -std::numeric_limits<double>::infinity());
  m.solution.gap = NumOr(s.at("gap"), std::numeric_limits<double>::infinity());
  m.solution.nodes = s.at("nodes").get<std::int64_t>();
  m.solution.wall_time = s.at("wall_time").get<double>();
  m.big_l = s.at("big_l").get<double>();
  m.big_l_shift =
      NumOr(s.at("big_l_shift"), std::numeric_limits<double>::quiet_NaN());
  return m;
}

ordered_json InnerJson(const std::variant<DualModel, PrimalModel>& inner) {
  if (const auto* d = std::get_if<DualModel>(&inner)) return DualJson(*d);
  return PrimalJson(std::get<PrimalModel>(inner));
}

std::variant<DualModel, PrimalModel> InnerFrom(const json& j, int dim) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dual") return DualFrom(j, dim);
  if (type == "primal") return PrimalFrom(j, dim);
  throw DataError("model file: unknown model type '" + type + "'");
}

}  // namespace

void WriteModel(const TrainedModel& tm, std::ostream& out) {
  ordered_json j;
  j["format"] = "mismm-model";
  j["version"] = kFormatVersion;
  j["method"] = tm.method.ToString();
  j["C"] = tm.c;
  j["sigma"] = tm.sigma;
  j["cost"] = {{"positive", tm.cost.positive}, {"negative", tm.cost.negative}};
  j["log_columns"] = tm.log_columns;
  j["scaler"] = ScalerJson(tm.scaler);
  ordered_json meta;
  meta["rng"] = kRngName;
  meta["n_features"] = tm.num_features();
  if (const auto* m = std::get_if<MiSvmModel>(&tm.model)) {
    meta["summary"] = m->transform().spec.ToString();
    meta["quantile"] = "type7";
    meta["kurtosis"] = "non-excess";
    meta["sd_denominator"] = "n-1";
  }
  if (!std::isnan(tm.gap())) meta["gap"] = Num(tm.gap());
  j["metadata"] = std::move(meta);
  if (const auto* d = std::get_if<DualModel>(&tm.model)) {
    j["model"] = DualJson(*d);
  } else if (const auto* p = std::get_if<PrimalModel>(&tm.model)) {
    j["model"] = PrimalJson(*p);
  } else {
    const auto& m = std::get<MiSvmModel>(tm.model);
    j["model"] = {{"type", "mi-svm"},
                  {"summary", m.transform().spec.ToString()},
                  {"summary_scaler", ScalerJson(m.transform().scaler)},
                  {"inner", InnerJson(m.inner())}};
  }
  out << j.dump(1) << "\n";
}

TrainedModel ReadModel(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  try {
    if (j.value("format", "") != "mismm-model") {
      throw DataError("model file: not a mismm model");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw DataError("model file: unsupported version");
    }
    TrainedModel tm;
    tm.method = MethodId::Parse(j.at("method").get<std::string>());
    tm.c = j.at("C").get<double>();
    tm.sigma = j.at("sigma").get<double>();
    tm.cost = CostWeights{j.at("cost").at("positive").get<double>(),
                          j.at("cost").at("negative").get<double>()};
    tm.log_columns = j.at("log_columns").get<std::vector<std::string>>();
    tm.scaler = ScalerFrom(j.at("scaler"));
    const int dim = static_cast<int>(tm.scaler.kept.size());
    const json& m = j.at("model");
    const std::string type = m.at("type").get<std::string>();
    if (type == "mi-svm") {
      SummaryTransform t;
      t.spec = SummarySpec::Parse(m.at("summary").get<std::string>());
      t.scaler = ScalerFrom(m.at("summary_scaler"));
      const int sdim = static_cast<int>(t.scaler.kept.size());
      tm.model = MiSvmModel(std::move(t), InnerFrom(m.at("inner"), sdim));
    } else if (type == "dual") {
      tm.model = DualFrom(m, dim);
    } else {
      tm.model = PrimalFrom(m, dim);
    }
    return tm;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void SaveModel(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  WriteModel(model, out);
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  return ReadModel(in);
}

}  // namespace mismm
