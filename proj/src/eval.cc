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

#include "mismm/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mismm/errors.h"
#include "mismm/kernels.h"
#include "mismm/parallel.h"

namespace mismm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::uint64_t DeriveSeed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out;
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("auroc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  double npos = 0.0, nneg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw DataError("auroc: NaN score");
    if (labels[i] == 1) {
      ++npos;
    } else if (labels[i] == -1) {
      ++nneg;
    } else {
      throw DataError("auroc: labels must be -1 or +1");
    }
  }
  if (npos == 0 || nneg == 0) throw DataError("auroc: need both classes");
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) rank_sum += mid;
    }
    i = j;
  }
  const double u = rank_sum - npos * (npos + 1) / 2.0;
  return u / (npos * nneg);
}

CostWeights WeightedC(double base_c, int positive_bags,
                      int negative_instances) {
  if (!(base_c > 0.0) || !std::isfinite(base_c)) {
    throw DataError("weighted C: base C must be positive");
  }
  if (positive_bags <= 0 || negative_instances <= 0) {
    throw DataError("weighted C: need positive bags and negative instances");
  }
  const double total = positive_bags + negative_instances;
  return CostWeights{base_c * total / (2.0 * positive_bags),
                     base_c * total / (2.0 * negative_instances)};
}

CostWeights WeightedC(double base_c, const Dataset& ds) {
  return WeightedC(base_c, ds.num_positive_bags(), ds.num_negative_instances());
}

std::vector<int> StratifiedFolds(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("folds: k must be >= 2");
  if (k > ds.num_bags()) {
    throw DataError("folds: k = " + std::to_string(k) + " exceeds " +
                    std::to_string(ds.num_bags()) + " bags");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(ds.num_bags(), 0);
  int next = 0;
  for (int label : {1, -1}) {
    std::vector<int> members;
    for (int b = 0; b < ds.num_bags(); ++b) {
      if (ds.bag(b).label == label) members.push_back(b);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (int b : members) {
      fold[b] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

std::string MethodId::ToString() const {
  switch (kind) {
    case Kind::kMismmHeuristic:
      return "mismm-heuristic";
    case Kind::kMismmMiqp:
      return "mismm-miqp";
    case Kind::kSiSmm:
      return "si-smm";
    case Kind::kMiSvm:
      return (mi_svm_algorithm == MiSvmAlgorithm::kMiqp ? "mi-svm-miqp:"
                                                        : "mi-svm:") +
             summary.ToString();
  }
  return "unknown";
}

MethodId MethodId::Parse(const std::string& text) {
  MethodId m;
  if (text == "mismm-heuristic") {
    m.kind = Kind::kMismmHeuristic;
  } else if (text == "mismm-miqp") {
    m.kind = Kind::kMismmMiqp;
  } else if (text == "si-smm") {
    m.kind = Kind::kSiSmm;
  } else if (text.rfind("mi-svm:", 0) == 0) {
    m.kind = Kind::kMiSvm;
    m.summary = SummarySpec::Parse(text.substr(7));
  } else if (text.rfind("mi-svm-miqp:", 0) == 0) {
    m.kind = Kind::kMiSvm;
    m.mi_svm_algorithm = MiSvmAlgorithm::kMiqp;
    m.summary = SummarySpec::Parse(text.substr(12));
  } else {
    throw DataError("unknown method '" + text +
                    "' (expected mismm-heuristic, mismm-miqp, si-smm, "
                    "mi-svm:<spec> or mi-svm-miqp:<spec>)");
  }
  return m;
}

bool MethodId::uses_miqp() const {
  return kind == Kind::kMismmMiqp ||
         (kind == Kind::kMiSvm && mi_svm_algorithm == MiSvmAlgorithm::kMiqp);
}

double MedianSquaredDistance(const Dataset& ds) {
  constexpr int kMaxRows = 1000;
  const int total = ds.num_samples();
  if (total < 2) throw DataError("median heuristic needs at least 2 samples");
  Eigen::MatrixXd pooled(total, ds.dim());
  int row = 0;
  for (const DistInstance& inst : ds.instances()) {
    pooled.middleRows(row, inst.num_samples()) = inst.samples();
    row += inst.num_samples();
  }
  const int m = std::min(total, kMaxRows);
  Eigen::MatrixXd x(m, ds.dim());
  for (int i = 0; i < m; ++i) {
    x.row(i) = pooled.row(static_cast<int>(
        static_cast<std::int64_t>(i) * total / m));
  }
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) d2.push_back((x.row(i) - x.row(j)).squaredNorm());
  }
  auto mid = d2.begin() + d2.size() / 2;
  std::nth_element(d2.begin(), mid, d2.end());
  double median = *mid;
  if (!(median > 0.0)) {
    median = std::accumulate(d2.begin(), d2.end(), 0.0) / d2.size();
  }
  return median > 0.0 ? median : 1.0;
}

// ---------------------------------------------------------------------------
// Training pipeline

namespace {

// Raw data after the log transform and the scaler, plus the per-method view:
// `base` holds the scaled data (or its summaries for MI-SVM) with the
// original bags; `Working` turns a subset of it into the training problem.
struct Prepared {
  ScaleParams scaler;
  std::optional<SummaryTransform> summary;
  std::optional<Dataset> base;
};

Dataset LogIfNeeded(const Dataset& raw, const std::vector<std::string>& cols) {
  if (cols.empty()) return raw;
  return LogTransform(raw, cols);
}

Prepared Prepare(const Dataset& raw, const MethodId& method,
                 const FitOptions& options) {
  Prepared p;
  const Dataset logged = LogIfNeeded(raw, options.log_columns);
  p.scaler = FitScaler(logged, options.constant_policy);
  Dataset scaled = ApplyScaler(logged, p.scaler);
  if (method.kind == MethodId::Kind::kMiSvm) {
    p.summary = FitSummaryTransform(scaled, method.summary);
    p.base = p.summary->Apply(scaled);
  } else {
    p.base = std::move(scaled);
  }
  return p;
}

Dataset Working(const MethodId& method, const Dataset& ds) {
  return method.kind == MethodId::Kind::kSiSmm ? SingleInstanceBags(ds) : ds;
}

CostWeights CostFor(double c, const Dataset& train, const FitOptions& options) {
  return options.weighted_c ? WeightedC(c, train) : CostWeights::Uniform(c);
}

HeuristicConfig MakeHeuristicConfig(const FitOptions& options,
                                    const CostWeights& cost, double sigma) {
  HeuristicConfig cfg;
  cfg.cost = cost;
  cfg.kernel = KernelSpec::Gaussian(sigma);
  cfg.max_selector_updates = options.max_selector_updates;
  cfg.n_restarts = options.n_restarts;
  cfg.seed = options.seed;
  return cfg;
}

MiqpConfig MakeMiqpConfig(const FitOptions& options, const CostWeights& cost,
                          double sigma, double time_limit) {
  MiqpConfig cfg;
  cfg.kernel = KernelSpec::Gaussian(sigma);
  cfg.cost = cost;
  cfg.m1 = options.m1;
  cfg.m2 = options.m2;
  cfg.big_l = options.big_l;
  cfg.time_limit = time_limit;
  cfg.seed = options.seed;
  return cfg;
}

TrainedModel Assemble(Prepared& prep, const MethodId& method,
                      const FitOptions& options,
                      std::variant<DualModel, PrimalModel> inner, double c,
                      double sigma, const CostWeights& cost) {
  TrainedModel tm;
  tm.method = method;
  tm.log_columns = options.log_columns;
  tm.scaler = prep.scaler;
  if (method.kind == MethodId::Kind::kMiSvm) {
    tm.model = MiSvmModel(*prep.summary, std::move(inner));
  } else if (auto* dual = std::get_if<DualModel>(&inner)) {
    tm.model = std::move(*dual);
  } else {
    tm.model = std::move(std::get<PrimalModel>(inner));
  }
  tm.c = c;
  tm.sigma = sigma;
  tm.cost = cost;
  return tm;
}

}  // namespace

const Classifier& TrainedModel::classifier() const {
  return std::visit([](const auto& m) -> const Classifier& { return m; },
                    model);
}

Dataset TrainedModel::Preprocess(const Dataset& raw) const {
  Dataset scaled = ApplyScaler(LogIfNeeded(raw, log_columns), scaler);
  if (const auto* m = std::get_if<MiSvmModel>(&model)) {
    return m->transform().Apply(scaled);
  }
  return scaled;
}

std::vector<double> TrainedModel::ScoreInstances(const Dataset& raw) const {
  const Dataset scaled = ApplyScaler(LogIfNeeded(raw, log_columns), scaler);
  return classifier().ScoreInstances(scaled.instances());
}

std::vector<double> TrainedModel::ScoreBags(const Dataset& raw) const {
  return BagScores(raw, ScoreInstances(raw));
}

double TrainedModel::gap() const {
  if (const auto* p = std::get_if<PrimalModel>(&model)) return p->solution.gap;
  if (const auto* m = std::get_if<MiSvmModel>(&model)) {
    if (const auto* p = std::get_if<PrimalModel>(&m->inner())) {
      return p->solution.gap;
    }
  }
  return kNaN;
}

int TrainedModel::num_features() const {
  if (const auto* m = std::get_if<MiSvmModel>(&model)) return m->num_features();
  return static_cast<int>(scaler.kept.size());
}

TrainedModel FitMethod(const Dataset& raw, const MethodId& method,
                       const FitOptions& options) {
  Prepared prep = Prepare(raw, method, options);
  const Dataset train = Working(method, *prep.base);
  const double sigma = options.sigma > 0.0
                           ? options.sigma
                           : std::sqrt(MedianSquaredDistance(train));
  const CostWeights cost = CostFor(options.c, train, options);
  if (method.uses_miqp()) {
    MiqpFit fit = FitMiqp(
        train, MakeMiqpConfig(options, cost, sigma, options.time_limit));
    return Assemble(prep, method, options, std::move(fit.model), options.c,
                    sigma, cost);
  }
  DualModel model = FitHeuristic(train, MakeHeuristicConfig(options, cost, sigma));
  return Assemble(prep, method, options, std::move(model), options.c, sigma,
                  cost);
}

namespace {

std::vector<double> SortedUnique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct Fold {
  std::vector<int> train_bags;
  std::vector<int> test_bags;
  std::vector<int> train_instances;  // base instance indices, bag order
  std::vector<int> test_instances;
  std::vector<int> test_labels;
  bool evaluable = false;  // both classes present in the test bags
};

std::vector<int> InstancesOf(const Dataset& ds, const std::vector<int>& bags) {
  std::vector<int> out;
  for (int b : bags) {
    out.insert(out.end(), ds.bag(b).instances.begin(), ds.bag(b).instances.end());
  }
  return out;
}

// Bag-max scores of consecutive bags given instance scores in bag order.
std::vector<double> BagMax(const Dataset& ds, const std::vector<int>& bags,
                           std::span<const double> scores) {
  std::vector<double> out;
  std::size_t pos = 0;
  for (int b : bags) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ds.bag(b).instances.size(); ++k) {
      best = std::max(best, scores[pos++]);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

GridSearchResult GridSearchFit(const Dataset& raw, const MethodId& method,
                               const CvPlan& plan, const FitOptions& options) {
  const std::vector<double> c_grid = SortedUnique(plan.c_grid);
  if (c_grid.empty()) throw DataError("grid search: empty C grid");
  for (double c : c_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw DataError("grid search: C values must be positive");
    }
  }
  Prepared prep = Prepare(raw, method, options);
  const Dataset& base = *prep.base;

  std::vector<double> sigmas;
  if (!plan.sigma_grid.empty()) {
    sigmas = SortedUnique(plan.sigma_grid);
  } else {
    const double median = MedianSquaredDistance(base);
    for (double m : SortedUnique(plan.sigma2_multiples)) {
      sigmas.push_back(std::sqrt(m * median));
    }
  }
  if (sigmas.empty()) throw DataError("grid search: empty sigma grid");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DataError("grid search: sigma values must be positive");
    }
  }

  const int k = std::min(plan.inner_k, base.num_bags());
  const std::vector<int> fold_of =
      StratifiedFolds(base, k, DeriveSeed({plan.seed, options.seed, 17}));
  std::vector<Fold> folds(k);
  for (int b = 0; b < base.num_bags(); ++b) {
    for (int f = 0; f < k; ++f) {
      (fold_of[b] == f ? folds[f].test_bags : folds[f].train_bags).push_back(b);
    }
  }
  for (Fold& fold : folds) {
    fold.train_instances = InstancesOf(base, fold.train_bags);
    fold.test_instances = InstancesOf(base, fold.test_bags);
    bool pos = false, neg = false;
    for (int b : fold.test_bags) {
      fold.test_labels.push_back(base.bag(b).label);
      (base.bag(b).label > 0 ? pos : neg) = true;
    }
    fold.evaluable = pos && neg;
  }

  const bool miqp = method.uses_miqp();
  std::vector<Eigen::MatrixXd> grams(sigmas.size());
  std::vector<GridPoint> points;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const KernelSpec spec = KernelSpec::Gaussian(sigmas[si]);
    if (!miqp) grams[si] = ComputeGram(base.instances(), spec).values;
    const Eigen::MatrixXd& gram = grams[si];
    // One task per (C, fold).
    const std::size_t ntasks = c_grid.size() * folds.size();
    std::vector<double> auc(ntasks, kNaN);
    std::vector<std::string> errors(ntasks);
    ParallelFor(ntasks, [&](std::size_t t) {
      const double c = c_grid[t / folds.size()];
      const Fold& fold = folds[t % folds.size()];
      if (!fold.evaluable) return;
      try {
        const Dataset train = Working(method, base.SubsetBags(fold.train_bags));
        const CostWeights cost = CostFor(c, train, options);
        std::vector<double> scores;
        if (miqp) {
          const MiqpFit fit = FitMiqp(
              train, MakeMiqpConfig(options, cost, sigmas[si],
                                    std::min(plan.inner_time_limit,
                                             options.time_limit)));
          std::vector<DistInstance> test;
          for (int i : fold.test_instances) test.push_back(base.instance(i));
          scores = fit.model.ScoreInstances(test);
        } else {
          const HeuristicFit fit = FitHeuristicOnGram(
              train, gram(fold.train_instances, fold.train_instances),
              MakeHeuristicConfig(options, cost, sigmas[si]));
          const Eigen::VectorXd s = fit.ScoresFromGram(
              gram(fold.test_instances, fold.train_instances));
          scores.assign(s.data(), s.data() + s.size());
        }
        auc[t] = Auroc(BagMax(base, fold.test_bags, scores), fold.test_labels);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    });
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
      GridPoint point{c_grid[ci], sigmas[si], 0.0, 0, ""};
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const double a = auc[ci * folds.size() + f];
        if (std::isnan(a)) {
          const std::string& err = errors[ci * folds.size() + f];
          if (!err.empty() && point.error.empty()) point.error = err;
          continue;
        }
        point.mean_auroc += a;
        ++point.folds_used;
      }
      if (point.folds_used > 0) {
        point.mean_auroc /= point.folds_used;
        point.error.clear();
      } else {
        point.mean_auroc = kNaN;
        if (point.error.empty()) point.error = "no evaluable fold";
      }
      points.push_back(std::move(point));
    }
  }

  const GridPoint* best = nullptr;
  for (const GridPoint& p : points) {
    if (p.folds_used == 0) continue;
    if (best == nullptr || p.mean_auroc > best->mean_auroc ||
        (p.mean_auroc == best->mean_auroc &&
         (p.c < best->c || (p.c == best->c && p.sigma < best->sigma)))) {
      best = &p;
    }
  }
  if (best == nullptr) {
    std::ostringstream msg;
    msg << "grid search: every grid point failed";
    for (const GridPoint& p : points) {
      msg << "\n  C=" << p.c << " sigma=" << p.sigma << ": " << p.error;
    }
    throw SolverError(msg.str());
  }

  GridSearchResult result;
  result.chosen_c = best->c;
  result.chosen_sigma = best->sigma;
  const Dataset train = Working(method, base);
  const CostWeights cost = CostFor(best->c, train, options);
  if (miqp) {
    MiqpFit fit = FitMiqp(train, MakeMiqpConfig(options, cost, best->sigma,
                                                options.time_limit));
    result.model = Assemble(prep, method, options, std::move(fit.model),
                            best->c, best->sigma, cost);
  } else {
    const std::size_t si =
        std::find(sigmas.begin(), sigmas.end(), best->sigma) - sigmas.begin();
    const HeuristicConfig cfg = MakeHeuristicConfig(options, cost, best->sigma);
    const HeuristicFit fit = FitHeuristicOnGram(train, grams[si], cfg);
    result.model = Assemble(prep, method, options,
                            MakeDualModel(train, fit, cfg.kernel), best->c,
                            best->sigma, cost);
  }
  result.points = std::move(points);
  return result;
}

// ---------------------------------------------------------------------------
// Benchmark

void BenchmarkConfig::Validate() const {
  if (methods.empty()) throw DataError("benchmark: no methods");
  if (replicates < 1) throw DataError("benchmark: replicates must be >= 1");
  if (plan.inner_k < 2) throw DataError("benchmark: inner_folds must be >= 2");
  if (mode == Mode::kSimulation) {
    if (scenarios.empty()) throw DataError("benchmark: no scenarios");
    if (sizes.empty()) throw DataError("benchmark: no sizes");
    if (test_bags < 2) throw DataError("benchmark: test_bags must be >= 2");
    for (const SizeSpec& s : sizes) {
      if (s.n_bags < 2 || s.n_inst < 1 || s.n_samp < 1) {
        throw DataError("benchmark: invalid size");
      }
    }
  } else {
    if (dataset.empty()) throw DataError("benchmark: cv mode needs 'dataset'");
    if (plan.k < 2) throw DataError("benchmark: folds must be >= 2");
  }
}

BenchmarkConfig ParseBenchmarkConfig(std::istream& in) {
  using nlohmann::json;
  BenchmarkConfig cfg;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("benchmark config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("benchmark config: expected an object");
  static const std::set<std::string> known = {
      "mode", "scenarios", "sizes", "dataset", "methods", "replicates",
      "test_bags", "seed", "folds", "inner_folds", "c_grid",
      "sigma2_multiples", "sigma_grid", "time_limit", "inner_time_limit",
      "big_l", "m1", "m2", "max_selector_updates", "n_restarts", "weighted_c",
      "log_columns", "drop_constant", "output"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw DataError("benchmark config: unknown key '" + key + "'");
    }
  }
  try {
    const std::string mode = j.value("mode", "simulation");
    if (mode == "simulation") {
      cfg.mode = BenchmarkConfig::Mode::kSimulation;
    } else if (mode == "cv") {
      cfg.mode = BenchmarkConfig::Mode::kCv;
    } else {
      throw DataError("benchmark config: mode must be simulation or cv");
    }
    for (const auto& s : j.value("scenarios", json::array())) {
      cfg.scenarios.push_back(ParseScenario(s.get<std::string>()));
    }
    for (const auto& s : j.value("sizes", json::array())) {
      SizeSpec size;
      if (s.is_array()) {
        if (s.size() != 3) throw DataError("benchmark config: size needs 3 values");
        size = {s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
      } else {
        size = {s.at("bags").get<int>(), s.at("instances").get<int>(),
                s.at("samples").get<int>()};
      }
      cfg.sizes.push_back(size);
    }
    cfg.dataset = j.value("dataset", "");
    for (const auto& m : j.value("methods", json::array())) {
      cfg.methods.push_back(MethodId::Parse(m.get<std::string>()));
    }
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.test_bags = j.value("test_bags", cfg.test_bags);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.plan.seed = cfg.seed;
    cfg.plan.k = j.value("folds", cfg.plan.k);
    cfg.plan.replications = cfg.replicates;
    cfg.plan.inner_k = j.value("inner_folds", cfg.plan.inner_k);
    if (j.contains("c_grid")) cfg.plan.c_grid = j["c_grid"].get<std::vector<double>>();
    if (j.contains("sigma2_multiples")) {
      cfg.plan.sigma2_multiples = j["sigma2_multiples"].get<std::vector<double>>();
    }
    if (j.contains("sigma_grid")) {
      cfg.plan.sigma_grid = j["sigma_grid"].get<std::vector<double>>();
    }
    cfg.fit.time_limit = j.value("time_limit", cfg.fit.time_limit);
    cfg.plan.inner_time_limit =
        j.value("inner_time_limit", cfg.plan.inner_time_limit);
    cfg.fit.big_l = j.value("big_l", cfg.fit.big_l);
    cfg.fit.m1 = j.value("m1", cfg.fit.m1);
    cfg.fit.m2 = j.value("m2", cfg.fit.m2);
    cfg.fit.max_selector_updates =
        j.value("max_selector_updates", cfg.fit.max_selector_updates);
    cfg.fit.n_restarts = j.value("n_restarts", cfg.fit.n_restarts);
    cfg.fit.weighted_c = j.value("weighted_c", cfg.fit.weighted_c);
    cfg.fit.log_columns =
        j.value("log_columns", std::vector<std::string>{});
    if (j.value("drop_constant", false)) {
      cfg.fit.constant_policy = ConstantFeaturePolicy::kDrop;
    }
    cfg.output = j.value("output", "");
  } catch (const json::exception& e) {
    throw DataError(std::string("benchmark config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

namespace {

std::string Num(double v) { return std::isnan(v) ? "NA" : FormatDouble(v); }

}  // namespace

void WriteReportHeader(std::ostream& out) {
  out << "scenario,n_bags,n_inst,n_samp,method,replicate,auroc,wall_time_s,"
         "chosen_C,chosen_sigma,gap\n";
  out.flush();
}

void WriteReportRow(const ReportRow& r, std::ostream& out) {
  out << r.scenario << ',' << r.n_bags << ',' << r.n_inst << ',' << r.n_samp
      << ',' << r.method << ',' << r.replicate << ',' << Num(r.auroc) << ','
      << Num(r.wall_time_s) << ',' << Num(r.chosen_c) << ','
      << Num(r.chosen_sigma) << ',' << Num(r.gap) << '\n';
  out.flush();
}

std::vector<double> AverageTieRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mid;
    i = j;
  }
  return ranks;
}

namespace {

using CellKey = std::tuple<std::string, int, int, int>;

CellKey KeyOf(const ReportRow& r) {
  return {r.scenario, r.n_bags, r.n_inst, r.n_samp};
}

}  // namespace

std::vector<MethodSummary> BenchmarkReport::Summaries() const {
  std::vector<MethodSummary> out;
  std::map<std::pair<CellKey, std::string>, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const ReportRow& r : rows) {
    auto key = std::make_pair(KeyOf(r), r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(MethodSummary{r.scenario, {r.n_bags, r.n_inst, r.n_samp},
                                  r.method});
      values.emplace_back();
    }
    MethodSummary& s = out[it->second];
    if (std::isnan(r.auroc)) {
      ++s.failures;
    } else {
      values[it->second].push_back(r.auroc);
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::vector<double>& v = values[k];
    out[k].n = static_cast<int>(v.size());
    if (v.empty()) {
      out[k].mean_auroc = out[k].sd_auroc = kNaN;
      continue;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[k].mean_auroc = mean;
    out[k].sd_auroc = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  }
  return out;
}

std::map<std::string, double> BenchmarkReport::AverageRanks() const {
  std::set<std::string> methods;
  for (const ReportRow& r : rows) methods.insert(r.method);
  std::map<std::tuple<std::string, int, int, int, int>,
           std::map<std::string, double>>
      cells;
  for (const ReportRow& r : rows) {
    cells[{r.scenario, r.n_bags, r.n_inst, r.n_samp, r.replicate}][r.method] =
        r.auroc;
  }
  std::map<std::string, double> sum;
  int used = 0;
  for (const auto& [key, by_method] : cells) {
    if (by_method.size() != methods.size()) continue;
    std::vector<double> v;
    bool complete = true;
    for (const auto& [m, a] : by_method) {
      if (std::isnan(a)) complete = false;
      v.push_back(a);
    }
    if (!complete) continue;
    const std::vector<double> ranks = AverageTieRanks(v);
    std::size_t k = 0;
    for (const auto& [m, a] : by_method) sum[m] += ranks[k++];
    ++used;
  }
  std::map<std::string, double> out;
  if (used == 0) return out;
  for (const auto& [m, s] : sum) out[m] = s / used;
  return out;
}

void BenchmarkReport::WriteTable(std::ostream& out) const {
  out << std::left << std::setw(16) << "scenario" << std::setw(14) << "size"
      << std::setw(26) << "method" << std::right << std::setw(4) << "n"
      << std::setw(6) << "fail" << std::setw(12) << "mean_auroc"
      << std::setw(10) << "sd" << "\n";
  for (const MethodSummary& s : Summaries()) {
    std::ostringstream size;
    size << s.size.n_bags << "x" << s.size.n_inst << "x" << s.size.n_samp;
    out << std::left << std::setw(16) << s.scenario << std::setw(14)
        << size.str() << std::setw(26) << s.method << std::right
        << std::setw(4) << s.n << std::setw(6) << s.failures << std::fixed
        << std::setprecision(4) << std::setw(12) << s.mean_auroc
        << std::setw(10) << s.sd_auroc << "\n";
    out.unsetf(std::ios::fixed);
  }
  const auto ranks = AverageRanks();
  if (!ranks.empty()) {
    out << "\naverage AUROC rank (1 = best, ties averaged)\n";
    for (const auto& [m, r] : ranks) {
      out << "  " << std::left << std::setw(26) << m << std::right << std::fixed
          << std::setprecision(3) << r << "\n";
      out.unsetf(std::ios::fixed);
    }
  }
  bool any_miqp = false;
  for (const ReportRow& r : rows) any_miqp |= !std::isnan(r.gap);
  if (any_miqp) {
    out << "\nnote: MIQP fits stop at a wall-clock limit, so their results "
           "may differ between runs\n";
  }
  if (interrupted) out << "\nnote: run interrupted; table covers finished rows\n";
}

namespace {

// Most frequent value, ties to the smallest.
double Mode(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  double best = v[0];
  int best_count = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    if (static_cast<int>(j - i) > best_count) {
      best_count = static_cast<int>(j - i);
      best = v[i];
    }
    i = j;
  }
  return best;
}

ReportRow MakeRow(std::string scenario, int n_bags, int n_inst, int n_samp,
                  const MethodId& method, int rep) {
  ReportRow row;
  row.scenario = std::move(scenario);
  row.n_bags = n_bags;
  row.n_inst = n_inst;
  row.n_samp = n_samp;
  row.method = method.ToString();
  row.replicate = rep + 1;
  row.auroc = row.chosen_c = row.chosen_sigma = row.gap = kNaN;
  return row;
}

bool Stopped(const std::atomic<bool>* stop) {
  return stop != nullptr && stop->load();
}

}  // namespace

BenchmarkReport RunBenchmark(const BenchmarkConfig& config, std::ostream* csv,
                             const std::atomic<bool>* stop) {
  config.Validate();
  BenchmarkReport report;
  if (csv != nullptr) WriteReportHeader(*csv);
  auto emit = [&](ReportRow row) {
    if (!row.error.empty()) {
      std::cerr << "warning: " << row.method << " replicate " << row.replicate
                << " failed: " << row.error << "\n";
    }
    if (csv != nullptr) WriteReportRow(row, *csv);
    report.rows.push_back(std::move(row));
  };

  if (config.mode == BenchmarkConfig::Mode::kSimulation) {
    for (std::size_t si = 0; si < config.scenarios.size(); ++si) {
      for (std::size_t zi = 0; zi < config.sizes.size(); ++zi) {
        const SizeSpec& size = config.sizes[zi];
        for (int rep = 0; rep < config.replicates; ++rep) {
          if (Stopped(stop)) {
            report.interrupted = true;
            return report;
          }
          ScenarioConfig sc;
          sc.scenario = config.scenarios[si];
          sc.n_bags = size.n_bags;
          sc.instances_per_bag = size.n_inst;
          sc.samples_per_instance = size.n_samp;
          sc.seed = DeriveSeed({config.seed, si, zi, std::uint64_t(rep), 0});
          const LabeledDataset train = Generate(sc);
          sc.n_bags = config.test_bags;
          sc.seed = DeriveSeed({config.seed, si, zi, std::uint64_t(rep), 1});
          const LabeledDataset test = Generate(sc);
          std::vector<int> test_labels;
          for (const Bag& b : test.data.bags()) test_labels.push_back(b.label);

          for (const MethodId& method : config.methods) {
            if (Stopped(stop)) {
              report.interrupted = true;
              return report;
            }
            ReportRow row = MakeRow(ToString(sc.scenario), size.n_bags,
                                    size.n_inst, size.n_samp, method, rep);
            const auto start = Clock::now();
            try {
              FitOptions options = config.fit;
              options.seed = DeriveSeed({config.seed, si, zi, std::uint64_t(rep), 2});
              const GridSearchResult g =
                  GridSearchFit(train.data, method, config.plan, options);
              row.auroc = Auroc(g.model.ScoreBags(test.data), test_labels);
              row.chosen_c = g.chosen_c;
              row.chosen_sigma = g.chosen_sigma;
              row.gap = g.model.gap();
            } catch (const std::exception& e) {
              row.error = e.what();
              row.auroc = kNaN;
            }
            row.wall_time_s = Seconds(start);
            emit(std::move(row));
          }
        }
      }
    }
    return report;
  }

  const Dataset data = LoadDataset(config.dataset);
  std::vector<int> labels;
  for (const Bag& b : data.bags()) labels.push_back(b.label);
  const std::string name =
      std::filesystem::path(config.dataset).stem().string();
  for (int rep = 0; rep < config.replicates; ++rep) {
    const std::vector<int> fold_of =
        StratifiedFolds(data, config.plan.k, DeriveSeed({config.seed, std::uint64_t(rep), 3}));
    for (const MethodId& method : config.methods) {
      if (Stopped(stop)) {
        report.interrupted = true;
        return report;
      }
      ReportRow row = MakeRow(name, data.num_bags(), data.num_instances(),
                              data.num_samples(), method, rep);
      const auto start = Clock::now();
      std::vector<double> pooled(data.num_bags(), kNaN);
      std::vector<double> cs, sigmas, gaps;
      try {
        for (int f = 0; f < config.plan.k; ++f) {
          if (Stopped(stop)) {
            report.interrupted = true;
            return report;
          }
          std::vector<int> train_bags, test_bags;
          for (int b = 0; b < data.num_bags(); ++b) {
            (fold_of[b] == f ? test_bags : train_bags).push_back(b);
          }
          FitOptions options = config.fit;
          options.seed = DeriveSeed({config.seed, std::uint64_t(rep), std::uint64_t(f), 4});
          const GridSearchResult g = GridSearchFit(data.SubsetBags(train_bags),
                                                   method, config.plan, options);
          const std::vector<double> scores =
              g.model.ScoreBags(data.SubsetBags(test_bags));
          for (std::size_t t = 0; t < test_bags.size(); ++t) {
            pooled[test_bags[t]] = scores[t];
          }
          cs.push_back(g.chosen_c);
          sigmas.push_back(g.chosen_sigma);
          if (!std::isnan(g.model.gap())) gaps.push_back(g.model.gap());
        }
        row.auroc = Auroc(pooled, labels);
        row.chosen_c = Mode(cs);
        row.chosen_sigma = Mode(sigmas);
        if (!gaps.empty()) row.gap = *std::max_element(gaps.begin(), gaps.end());
      } catch (const std::exception& e) {
        row.error = e.what();
        row.auroc = kNaN;
      }
      row.wall_time_s = Seconds(start);
      emit(std::move(row));
    }
  }
  return report;
}

}  // namespace mismm
