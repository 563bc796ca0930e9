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

#ifndef MISMM_EVAL_H_
#define MISMM_EVAL_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mismm/baselines.h"
#include "mismm/data.h"
#include "mismm/dual.h"
#include "mismm/heuristic.h"
#include "mismm/miqp.h"
#include "mismm/simgen.h"

namespace mismm {

// Mann-Whitney AUROC; tied positive/negative pairs count 1/2.
double Auroc(std::span<const double> scores, std::span<const int> labels);

// C+ = c (n+g + n-i) / (2 n+g), C- = c (n+g + n-i) / (2 n-i), with n+g the
// number of positive bags and n-i the number of negative instances.
CostWeights WeightedC(double base_c, const Dataset& ds);
CostWeights WeightedC(double base_c, int positive_bags, int negative_instances);

// Fold id in [0, k) per bag, stratified by bag label.
std::vector<int> StratifiedFolds(const Dataset& ds, int k, std::uint64_t seed);

struct MethodId {
  enum class Kind { kMismmHeuristic, kMismmMiqp, kSiSmm, kMiSvm };
  Kind kind = Kind::kMismmHeuristic;
  SummarySpec summary;  // kMiSvm only
  MiSvmAlgorithm mi_svm_algorithm = MiSvmAlgorithm::kHeuristic;

  // mismm-heuristic, mismm-miqp, si-smm, mi-svm:<spec>, mi-svm-miqp:<spec>
  std::string ToString() const;
  static MethodId Parse(const std::string& text);
  bool uses_miqp() const;
};

// Hyperparameters and solver settings for one fit.
struct FitOptions {
  double c = 1.0;
  double sigma = 0.0;  // <= 0: median heuristic on the training data
  bool weighted_c = true;
  int max_selector_updates = 50;
  int n_restarts = 1;
  int m1 = 0;
  int m2 = 0;
  double big_l = 100.0;
  double time_limit = 60.0;
  std::uint64_t seed = 0;
  std::vector<std::string> log_columns;
  ConstantFeaturePolicy constant_policy = ConstantFeaturePolicy::kError;
};

struct CvPlan {
  int k = 10;  // outer folds (cv mode)
  int replications = 10;
  int inner_k = 5;
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  // Multiples of the median pairwise squared sample distance.
  std::vector<double> sigma2_multiples = {0.25, 1.0, 4.0};
  // Explicit sigma values; when nonempty they replace the multiples.
  std::vector<double> sigma_grid;
  // MIQP time limit inside inner folds.
  double inner_time_limit = 10.0;
  std::uint64_t seed = 0;
};

// Median of pairwise squared distances between pooled sample vectors
// (deterministic subsample of at most 1000 rows).
double MedianSquaredDistance(const Dataset& ds);

// Everything needed to score raw data: log transform, scaler, model.
struct TrainedModel {
  using Model = std::variant<DualModel, PrimalModel, MiSvmModel>;

  MethodId method;
  std::vector<std::string> log_columns;
  ScaleParams scaler;
  Model model;
  double c = 0.0;
  double sigma = 0.0;
  CostWeights cost;

  const Classifier& classifier() const;
  // Raw data as seen by the model: log transform, scaler and, for MI-SVM,
  // standardized summaries.
  Dataset Preprocess(const Dataset& raw) const;
  // Raw instances -> instance scores.
  std::vector<double> ScoreInstances(const Dataset& raw) const;
  std::vector<double> ScoreBags(const Dataset& raw) const;
  // MIQP gap, NaN for other methods.
  double gap() const;
  int num_features() const;  // summary features for MI-SVM, else d
};

// Direct fit with fixed hyperparameters.
TrainedModel FitMethod(const Dataset& raw, const MethodId& method,
                       const FitOptions& options);

struct GridPoint {
  double c = 0.0;
  double sigma = 0.0;
  double mean_auroc = 0.0;
  int folds_used = 0;
  std::string error;  // nonempty when every fold failed
};

struct GridSearchResult {
  TrainedModel model;
  double chosen_c = 0.0;
  double chosen_sigma = 0.0;
  std::vector<GridPoint> points;
};

// Inner stratified k-fold CV at the bag level over the (C, sigma) grid;
// best mean AUROC wins, ties go to the smallest C and then the smallest sigma.
// The winner is refit on all of `raw`.
GridSearchResult GridSearchFit(const Dataset& raw, const MethodId& method,
                               const CvPlan& plan, const FitOptions& options);

struct SizeSpec {
  int n_bags = 20;
  int n_inst = 3;
  int n_samp = 50;
};

struct BenchmarkConfig {
  enum class Mode { kSimulation, kCv };
  Mode mode = Mode::kSimulation;
  std::vector<Scenario> scenarios;
  std::vector<SizeSpec> sizes;
  std::string dataset;  // cv mode
  std::vector<MethodId> methods;
  int replicates = 10;
  int test_bags = 500;
  CvPlan plan;
  FitOptions fit;
  std::uint64_t seed = 0;
  std::string output;  // report CSV path; may be set by the caller

  void Validate() const;
};

// Reads the JSON benchmark description.
BenchmarkConfig ParseBenchmarkConfig(std::istream& in);

struct ReportRow {
  std::string scenario;
  int n_bags = 0;
  int n_inst = 0;
  int n_samp = 0;
  std::string method;
  int replicate = 0;
  double auroc = 0.0;  // NaN when the fit failed
  double wall_time_s = 0.0;
  double chosen_c = 0.0;
  double chosen_sigma = 0.0;
  double gap = 0.0;  // NaN unless MIQP
  std::string error;
};

void WriteReportHeader(std::ostream& out);
void WriteReportRow(const ReportRow& row, std::ostream& out);

struct MethodSummary {
  std::string scenario;
  SizeSpec size;
  std::string method;
  int n = 0;
  int failures = 0;
  double mean_auroc = 0.0;
  double sd_auroc = 0.0;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  bool interrupted = false;

  std::vector<MethodSummary> Summaries() const;
  // Average AUROC rank per method (1 = best, ties averaged), over the
  // (scenario, size, replicate) cells in which every method succeeded.
  std::map<std::string, double> AverageRanks() const;
  void WriteTable(std::ostream& out) const;
};

// Ranks of `values`, 1 for the largest, ties receiving their average rank.
std::vector<double> AverageTieRanks(std::span<const double> values);

// Runs every (scenario, size, method, replicate) cell. Each finished row is
// written to `csv` (if given) and flushed. Stops between cells once `stop`
// becomes true.
BenchmarkReport RunBenchmark(const BenchmarkConfig& config, std::ostream* csv,
                             const std::atomic<bool>* stop = nullptr);

}  // namespace mismm

#endif  // MISMM_EVAL_H_
