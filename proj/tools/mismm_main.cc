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

// mismm command-line tool: simulate, fit, predict, benchmark.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mismm/data.h"
#include "mismm/errors.h"
#include "mismm/eval.h"
#include "mismm/heuristic.h"
#include "mismm/kernels.h"
#include "mismm/model_io.h"
#include "mismm/parallel.h"
#include "mismm/simgen.h"

namespace {

constexpr const char* kVersion = "0.1.0";

std::atomic<bool> g_interrupted{false};

void OnSigint(int) { g_interrupted.store(true); }

std::string VersionText() {
  std::string s = std::string("mismm ") + kVersion + " (built " + __DATE__ +
                  ", " +
#if defined(__clang__)
                  "clang " + __clang_version__ +
#elif defined(__GNUC__)
                  "gcc " + __VERSION__ +
#else
                  "unknown compiler" +
#endif
                  ")\nrng: " + mismm::kRngName;
  return s;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mismm::DataError("cannot write '" + path + "'");
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  bool verbose = false;
};

struct SimulateArgs {
  std::string scenario;
  int bags = 20;
  int instances = 3;
  int samples = 50;
  double p_pos = 0.15;
  std::string out;
  std::string labels;
};

int RunSimulate(const Globals& g, const SimulateArgs& a) {
  mismm::ScenarioConfig cfg;
  cfg.scenario = mismm::ParseScenario(a.scenario);
  cfg.n_bags = a.bags;
  cfg.instances_per_bag = a.instances;
  cfg.samples_per_instance = a.samples;
  cfg.p_pos = a.p_pos;
  cfg.seed = g.seed;
  const mismm::LabeledDataset ld = mismm::Generate(cfg);
  mismm::SaveDataset(ld.data, a.out);
  const std::string labels = a.labels.empty() ? a.out + ".labels.json" : a.labels;
  std::ofstream side = OpenOut(labels);
  mismm::WriteLabelSidecar(ld, cfg, side);
  std::cout << "bags " << ld.data.num_bags() << " (positive "
            << ld.data.num_positive_bags() << "), instances "
            << ld.data.num_instances() << ", samples " << ld.data.num_samples()
            << "\n";
  return 0;
}

struct FitArgs {
  std::string data;
  std::string method;
  double c = 1.0;
  double sigma = 0.0;
  bool grid = false;
  std::vector<double> c_grid;
  std::vector<double> sigma_grid;
  int inner_folds = 5;
  int m1 = 0;
  int m2 = 0;
  double big_l = 100.0;
  double time_limit = 60.0;
  int max_updates = 50;
  int restarts = 1;
  bool unweighted = false;
  std::vector<std::string> log_columns;
  bool drop_constant = false;
  std::string out;
  std::string dump_gram;
};

int RunFit(const Globals& g, const FitArgs& a) {
  const mismm::MethodId method = mismm::MethodId::Parse(a.method);
  const mismm::Dataset data = mismm::LoadDataset(a.data);
  mismm::FitOptions opt;
  opt.c = a.c;
  opt.sigma = a.sigma;
  opt.weighted_c = !a.unweighted;
  opt.max_selector_updates = a.max_updates;
  opt.n_restarts = a.restarts;
  opt.m1 = a.m1;
  opt.m2 = a.m2;
  opt.big_l = a.big_l;
  opt.time_limit = a.time_limit;
  opt.seed = g.seed;
  opt.log_columns = a.log_columns;
  if (a.drop_constant) opt.constant_policy = mismm::ConstantFeaturePolicy::kDrop;

  mismm::TrainedModel model;
  if (a.grid) {
    mismm::CvPlan plan;
    plan.inner_k = a.inner_folds;
    plan.seed = g.seed;
    plan.inner_time_limit = a.time_limit;
    if (!a.c_grid.empty()) plan.c_grid = a.c_grid;
    if (!a.sigma_grid.empty()) plan.sigma_grid = a.sigma_grid;
    mismm::GridSearchResult r = mismm::GridSearchFit(data, method, plan, opt);
    if (g.verbose) {
      for (const mismm::GridPoint& p : r.points) {
        std::cerr << "grid C=" << p.c << " sigma=" << p.sigma
                  << " mean_auroc=" << p.mean_auroc << " folds=" << p.folds_used
                  << (p.error.empty() ? "" : " error=" + p.error) << "\n";
      }
    }
    model = std::move(r.model);
  } else {
    model = mismm::FitMethod(data, method, opt);
  }
  mismm::SaveModel(model, a.out);
  if (!a.dump_gram.empty()) {
    const mismm::Dataset pre = model.Preprocess(data);
    std::ofstream out = OpenOut(a.dump_gram);
    mismm::WriteGramCsv(
        mismm::ComputeGram(pre.instances(), mismm::KernelSpec::Gaussian(model.sigma)),
        out);
  }
  std::cout << "method " << method.ToString() << ", C " << model.c
            << ", sigma " << model.sigma << ", features " << model.num_features();
  if (!std::isnan(model.gap())) std::cout << ", gap " << model.gap();
  std::cout << "\n";
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  double threshold = 0.0;
  std::string out;
};

int RunPredict(const PredictArgs& a) {
  const mismm::TrainedModel model = mismm::LoadModel(a.model);
  const mismm::Dataset data = mismm::LoadDataset(a.data);
  const std::vector<double> scores = model.ScoreBags(data);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = OpenOut(a.out);
    out = &file;
  }
  *out << "bag_id,score,label\n";
  for (int b = 0; b < data.num_bags(); ++b) {
    *out << data.bag(b).id << ',' << mismm::FormatDouble(scores[b]) << ','
         << (scores[b] > a.threshold ? 1 : -1) << '\n';
  }
  return 0;
}

struct BenchmarkArgs {
  std::string config;
  std::string out;
  std::string table;
};

int RunBenchmarkCmd(const Globals& g, const BenchmarkArgs& a, bool seed_given) {
  std::ifstream in(a.config);
  if (!in) throw mismm::DataError("cannot open config '" + a.config + "'");
  mismm::BenchmarkConfig cfg = mismm::ParseBenchmarkConfig(in);
  if (seed_given) {
    cfg.seed = g.seed;
    cfg.plan.seed = g.seed;
  }
  std::string out_path = !a.out.empty() ? a.out : cfg.output;
  if (out_path.empty()) out_path = "report.csv";
  std::ofstream csv = OpenOut(out_path);
  std::signal(SIGINT, OnSigint);
  const mismm::BenchmarkReport report =
      mismm::RunBenchmark(cfg, &csv, &g_interrupted);
  std::signal(SIGINT, SIG_DFL);
  report.WriteTable(std::cout);
  if (!a.table.empty()) {
    std::ofstream t = OpenOut(a.table);
    report.WriteTable(t);
  }
  if (report.interrupted) {
    std::cerr << "interrupted: " << report.rows.size() << " rows written to "
              << out_path << "\n";
    return 130;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-margin classification of bags of distributional "
               "instances"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")
                       ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", g.verbose, "Diagnostics on stderr");
  app.set_version_flag("--version", VersionText());

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
  simulate->add_option("--scenario", sim.scenario,
                       "t_vs_normal, cov_diff, mean_diff or large_cov_diff")
      ->required();
  simulate->add_option("--bags", sim.bags)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--instances", sim.instances)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--samples", sim.samples)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--p-pos", sim.p_pos)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  simulate->add_option("--out", sim.out, "Dataset CSV")->required();
  simulate->add_option("--labels", sim.labels,
                       "Hidden-label JSON (default <out>.labels.json)");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Train a model");
  fitc->add_option("--data", fit.data, "Training CSV")->required();
  fitc->add_option("--method", fit.method,
                   "mismm-heuristic, mismm-miqp, si-smm, mi-svm:<spec>, "
                   "mi-svm-miqp:<spec>")
      ->required();
  fitc->add_option("--C", fit.c)->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--sigma", fit.sigma, "Gaussian bandwidth (0 = median heuristic)")
      ->check(CLI::NonNegativeNumber);
  fitc->add_flag("--grid", fit.grid, "Tune C and sigma by inner cross-validation");
  fitc->add_option("--c-grid", fit.c_grid)->delimiter(',');
  fitc->add_option("--sigma-grid", fit.sigma_grid)->delimiter(',');
  fitc->add_option("--inner-folds", fit.inner_folds)->check(CLI::Range(2, 1000))->capture_default_str();
  fitc->add_option("--m1", fit.m1, "Nystrom rank (0 = m2)")->check(CLI::NonNegativeNumber);
  fitc->add_option("--m2", fit.m2, "Nystrom anchors (0 = min(samples, 240))")
      ->check(CLI::NonNegativeNumber);
  fitc->add_option("--big-l", fit.big_l)->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--time-limit", fit.time_limit, "MIQP time limit in seconds")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  fitc->add_option("--max-updates", fit.max_updates)->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--restarts", fit.restarts)->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_flag("--unweighted-c", fit.unweighted, "Same C for both classes");
  fitc->add_option("--log-transform", fit.log_columns,
                   "Columns to replace by their log")->delimiter(',');
  fitc->add_flag("--drop-constant", fit.drop_constant,
                 "Drop zero-variance features instead of failing");
  fitc->add_option("--out", fit.out, "Model JSON")->required();
  fitc->add_option("--dump-gram", fit.dump_gram, "Write the training Gram matrix");

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Score bags with a model");
  predict->add_option("--model", pred.model)->required();
  predict->add_option("--data", pred.data)->required();
  predict->add_option("--threshold", pred.threshold)->capture_default_str();
  predict->add_option("--out", pred.out, "CSV path (default stdout)");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run a benchmark config");
  benchmark->add_option("--config", bench.config, "JSON config")->required();
  benchmark->add_option("--out", bench.out, "Report CSV");
  benchmark->add_option("--table", bench.table, "Also write the summary table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    mismm::SetMaxThreads(g.threads);
    if (*simulate) return RunSimulate(g, sim);
    if (*fitc) return RunFit(g, fit);
    if (*predict) return RunPredict(pred);
    if (*benchmark) return RunBenchmarkCmd(g, bench, seed_opt->count() > 0);
  } catch (const mismm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mismm::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
