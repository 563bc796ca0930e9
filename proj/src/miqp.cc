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

#include "mismm/miqp.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <queue>
#include <random>

#include "mismm/errors.h"
#include "mismm/qp.h"

namespace mismm {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kIntegralityTol = 1e-6;
constexpr double kPruneTol = 1e-9;

// Position of every binary: positive bag ordinal and instance.
struct BinaryIndex {
  std::vector<int> bag;       // dataset bag index per binary
  std::vector<int> instance;  // feature row per binary
  std::vector<int> first;     // first binary of each positive bag
  std::vector<int> count;     // binaries of each positive bag
  std::vector<int> positive_bags;
};

BinaryIndex IndexBinaries(const std::vector<Bag>& bags) {
  BinaryIndex idx;
  for (int b = 0; b < static_cast<int>(bags.size()); ++b) {
    if (bags[b].label < 0) continue;
    idx.positive_bags.push_back(b);
    idx.first.push_back(static_cast<int>(idx.bag.size()));
    idx.count.push_back(static_cast<int>(bags[b].instances.size()));
    for (int i : bags[b].instances) {
      idx.bag.push_back(b);
      idx.instance.push_back(i);
    }
  }
  return idx;
}

// -1 free, 0 or 1 fixed.
using Fixing = std::vector<std::int8_t>;

// Forces the remaining binaries of a bag to 0 once |I| - 1 of them are 1.
// Returns false if some bag has every binary fixed to 1.
bool Propagate(const BinaryIndex& idx, Fixing& fix) {
  for (std::size_t p = 0; p < idx.first.size(); ++p) {
    int ones = 0;
    for (int k = 0; k < idx.count[p]; ++k) ones += fix[idx.first[p] + k] == 1;
    if (ones == idx.count[p]) return false;
    if (ones == idx.count[p] - 1) {
      for (int k = 0; k < idx.count[p]; ++k) {
        if (fix[idx.first[p] + k] == -1) fix[idx.first[p] + k] = 0;
      }
    }
  }
  return true;
}

struct Relaxation {
  Eigen::VectorXd w;
  double b = 0.0;
  double objective = 0.0;
  // Relaxed zeta per binary; fixed binaries carry their fixed value.
  Eigen::VectorXd zeta;
};

// Convex relaxation with free binaries in [0, 1].
Relaxation SolveRelaxation(const MiqpProblem& p, const BinaryIndex& idx,
                           const Fixing& fix) {
  const int dim = static_cast<int>(p.features.cols());
  const int nb = static_cast<int>(p.bags.size());
  std::vector<int> free_pos(fix.size(), -1);
  int nfree = 0;
  for (std::size_t k = 0; k < fix.size(); ++k) {
    if (fix[k] == -1) free_pos[k] = nfree++;
  }
  const int nvar = dim + 1 + nb + nfree;
  const int xi0 = dim + 1;
  const int zeta0 = dim + 1 + nb;

  std::vector<int> card_bags;
  for (std::size_t q = 0; q < idx.first.size(); ++q) {
    int ones = 0, zeros = 0;
    for (int k = 0; k < idx.count[q]; ++k) {
      ones += fix[idx.first[q] + k] == 1;
      zeros += fix[idx.first[q] + k] == 0;
    }
    if (zeros == 0 && ones < idx.count[q] - 1) {
      card_bags.push_back(static_cast<int>(q));
    }
  }
  int ninst = 0;
  for (const Bag& bag : p.bags) ninst += static_cast<int>(bag.instances.size());
  const int nrows = ninst + static_cast<int>(card_bags.size());

  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Zero(nvar, nvar);
  qp.hessian.topLeftCorner(dim, dim).setIdentity();
  qp.linear = Eigen::VectorXd::Zero(nvar);
  for (int b = 0; b < nb; ++b) {
    qp.linear(xi0 + b) = p.cost.ForLabel(p.bags[b].label);
  }
  qp.lower = Eigen::VectorXd::Constant(nvar, -INFINITY);
  qp.upper = Eigen::VectorXd::Constant(nvar, INFINITY);
  qp.lower.segment(xi0, nb).setZero();
  qp.lower.tail(nfree).setZero();
  qp.upper.tail(nfree).setOnes();
  qp.ineq_matrix = Eigen::MatrixXd::Zero(nrows, nvar);
  qp.ineq_rhs = Eigen::VectorXd::Constant(nrows, -1.0);

  int row = 0;
  std::vector<int> binary_of_instance(p.features.rows(), -1);
  for (std::size_t k = 0; k < idx.instance.size(); ++k) {
    binary_of_instance[idx.instance[k]] = static_cast<int>(k);
  }
  for (int b = 0; b < nb; ++b) {
    for (int i : p.bags[b].instances) {
      if (p.bags[b].label < 0) {
        // <w,z> + b - xi <= -1
        qp.ineq_matrix.block(row, 0, 1, dim) = p.features.row(i);
        qp.ineq_matrix(row, dim) = 1.0;
      } else {
        // -<w,z> - b - xi - L zeta <= -1
        qp.ineq_matrix.block(row, 0, 1, dim) = -p.features.row(i);
        qp.ineq_matrix(row, dim) = -1.0;
        const int k = binary_of_instance[i];
        if (fix[k] == -1) {
          qp.ineq_matrix(row, zeta0 + free_pos[k]) = -p.big_l;
        } else {
          qp.ineq_rhs(row) += p.big_l * fix[k];
        }
      }
      qp.ineq_matrix(row, xi0 + b) = -1.0;
      ++row;
    }
  }
  for (int q : card_bags) {
    int ones = 0;
    for (int k = 0; k < idx.count[q]; ++k) {
      const int g = idx.first[q] + k;
      if (fix[g] == -1) {
        qp.ineq_matrix(row, zeta0 + free_pos[g]) = 1.0;
      } else {
        ones += fix[g] == 1;
      }
    }
    qp.ineq_rhs(row) = idx.count[q] - 1 - ones;
    ++row;
  }

  QpSolution qs;
  try {
    qs = SolveQp(qp);
  } catch (const SolverError& e) {
    throw SolverError(std::string("branch and bound: relaxation failed: ") +
                      e.what());
  }
  Relaxation r;
  r.w = qs.x.head(dim);
  r.b = qs.x(dim);
  r.objective = qs.objective;
  r.zeta.resize(fix.size());
  for (std::size_t k = 0; k < fix.size(); ++k) {
    r.zeta(k) = fix[k] == -1 ? std::clamp(qs.x(zeta0 + free_pos[k]), 0.0, 1.0)
                             : static_cast<double>(fix[k]);
  }
  return r;
}

// Completes (w, b) with the best zeta and the smallest feasible slacks and
// evaluates the objective exactly. The zeta of a positive bag is re-chosen
// for (w, b), so the result can beat the fixing it was solved under.
MiqpSolution MakeIncumbent(const MiqpProblem& p, const BinaryIndex& idx,
                           const Relaxation& r, const Fixing& fix) {
  MiqpSolution s;
  s.w = r.w;
  s.b = r.b;
  s.xi = Eigen::VectorXd::Zero(p.bags.size());
  double loss = 0.0;
  std::size_t q = 0;
  for (std::size_t b = 0; b < p.bags.size(); ++b) {
    const Bag& bag = p.bags[b];
    const int n = static_cast<int>(bag.instances.size());
    std::vector<double> score(n);
    for (int k = 0; k < n; ++k) {
      score[k] = p.features.row(bag.instances[k]).dot(s.w) + s.b;
    }
    double need = 0.0;
    if (bag.label < 0) {
      for (double f : score) need = std::max(need, 1.0 + f);
    } else {
      // Which instance carries the margin; the others are relaxed by L.
      int best = -1;
      need = INFINITY;
      for (int j = 0; j < n; ++j) {
        double v = std::max(0.0, 1.0 - score[j]);
        for (int k = 0; k < n; ++k) {
          if (k != j) v = std::max(v, 1.0 - score[k] - p.big_l);
        }
        if (v < need) {
          need = v;
          best = j;
        }
      }
      // Keep the solved fixing when it is as good.
      double kept = 0.0;
      for (int k = 0; k < n; ++k) {
        kept = std::max(kept, 1.0 - score[k] - p.big_l * fix[idx.first[q] + k]);
      }
      if (kept <= need) {
        need = kept;
        best = -1;
      }
      std::vector<int> z(n);
      for (int k = 0; k < n; ++k) {
        z[k] = best < 0 ? fix[idx.first[q] + k] : (k == best ? 0 : 1);
      }
      s.zeta.push_back(std::move(z));
      ++q;
    }
    s.xi(b) = need;
    loss += p.cost.ForLabel(bag.label) * need;
  }
  s.objective = 0.5 * s.w.squaredNorm() + loss;
  return s;
}

struct Node {
  Fixing fix;
  double bound = -INFINITY;          // valid lower bound for the subtree
  double parent_relaxation = -INFINITY;
  std::int64_t id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

int MiqpProblem::num_binaries() const {
  int n = 0;
  for (const Bag& bag : bags) {
    if (bag.label > 0) n += static_cast<int>(bag.instances.size());
  }
  return n;
}

void MiqpProblem::Validate() const {
  cost.Validate();
  if (!(big_l > 0.0)) throw DataError("miqp: L must be positive");
  if (!(time_limit >= 0.0)) throw DataError("miqp: time limit must be >= 0");
  if (node_limit < 1) throw DataError("miqp: node limit must be >= 1");
  if (features.rows() == 0) throw DataError("miqp: no instances");
  std::vector<int> seen(features.rows(), 0);
  for (const Bag& bag : bags) {
    if (bag.instances.empty()) throw DataError("miqp: empty bag");
    for (int i : bag.instances) {
      if (i < 0 || i >= features.rows() || seen[i]++) {
        throw DataError("miqp: bags must partition the feature rows");
      }
    }
  }
  if (!features.allFinite()) throw DataError("miqp: non-finite features");
}

std::string ToString(MiqpStatus status) {
  switch (status) {
    case MiqpStatus::kOptimal:
      return "optimal";
    case MiqpStatus::kTimeLimit:
      return "time_limit";
    case MiqpStatus::kNodeLimit:
      return "node_limit";
  }
  return "unknown";
}

MiqpSolution BranchAndBound(const MiqpProblem& p, BranchTrace* trace) {
  p.Validate();
  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  const BinaryIndex idx = IndexBinaries(p.bags);
  const int nbin = static_cast<int>(idx.bag.size());

  Fixing root_fix(nbin, -1);
  Propagate(idx, root_fix);  // singleton positive bags are forced to 0
  const Relaxation root = SolveRelaxation(p, idx, root_fix);
  std::int64_t nodes = 1;

  // Rounding: per positive bag keep the best-scoring instance.
  MiqpSolution incumbent;
  {
    Fixing fix(nbin, 1);
    for (std::size_t q = 0; q < idx.first.size(); ++q) {
      int best = idx.first[q];
      double best_score = -INFINITY;
      for (int k = 0; k < idx.count[q]; ++k) {
        const int g = idx.first[q] + k;
        if (root_fix[g] == 1) continue;
        const double score = p.features.row(idx.instance[g]).dot(root.w) + root.b;
        if (score > best_score) {
          best_score = score;
          best = g;
        }
      }
      fix[best] = 0;
    }
    incumbent = MakeIncumbent(p, idx, SolveRelaxation(p, idx, fix), fix);
  }

  auto is_integral = [&](const Relaxation& r, const Fixing& fix) {
    for (int k = 0; k < nbin; ++k) {
      if (fix[k] != -1) continue;
      if (std::min(r.zeta(k), 1.0 - r.zeta(k)) > kIntegralityTol) return false;
    }
    return true;
  };
  auto try_integral = [&](const Relaxation& r, Fixing fix) {
    for (int k = 0; k < nbin; ++k) {
      if (fix[k] == -1) fix[k] = r.zeta(k) >= 0.5 ? 1 : 0;
    }
    if (!Propagate(idx, fix)) return;
    MiqpSolution cand = MakeIncumbent(p, idx, SolveRelaxation(p, idx, fix), fix);
    if (cand.objective < incumbent.objective) incumbent = std::move(cand);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::optional<Node> plunge;
  std::int64_t next_id = 1;

  // Branches `node` after its relaxation `r` has been solved.
  auto branch = [&](const Node& node, const Relaxation& r, double bound) {
    int var = -1;
    double best_frac = -1.0;
    for (int k = 0; k < nbin; ++k) {
      if (node.fix[k] != -1) continue;
      const double frac = std::min(r.zeta(k), 1.0 - r.zeta(k));
      if (frac > best_frac) {
        best_frac = frac;
        var = k;
      }
    }
    const int first_value = r.zeta(var) >= 0.5 ? 1 : 0;
    for (int value : {first_value, 1 - first_value}) {
      Node child;
      child.fix = node.fix;
      child.fix[var] = static_cast<std::int8_t>(value);
      child.bound = bound;
      child.parent_relaxation = r.objective;
      child.id = next_id++;
      if (!Propagate(idx, child.fix)) continue;
      if (value == first_value) {
        plunge = std::move(child);
      } else {
        open.push(std::move(child));
      }
    }
  };

  bool stopped = false;
  MiqpStatus status = MiqpStatus::kOptimal;
  {
    const double bound = root.objective;
    if (is_integral(root, root_fix)) {
      try_integral(root, root_fix);
    } else if (bound < incumbent.objective - kPruneTol) {
      Node root_node{root_fix, bound, -INFINITY, 0};
      branch(root_node, root, bound);
    }
  }

  while (plunge || !open.empty()) {
    Node node;
    if (plunge) {
      node = std::move(*plunge);
      plunge.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound >= incumbent.objective - kPruneTol) continue;
    if (elapsed() >= p.time_limit || nodes >= p.node_limit) {
      status = elapsed() >= p.time_limit ? MiqpStatus::kTimeLimit
                                         : MiqpStatus::kNodeLimit;
      open.push(std::move(node));
      stopped = true;
      break;
    }
    const Relaxation r = SolveRelaxation(p, idx, node.fix);
    ++nodes;
    if (trace != nullptr) {
      trace->parent_child_bounds.emplace_back(node.parent_relaxation,
                                              r.objective);
    }
    const double bound = std::max(node.bound, r.objective);
    if (bound >= incumbent.objective - kPruneTol) continue;
    if (is_integral(r, node.fix)) {
      try_integral(r, node.fix);
      continue;
    }
    branch(node, r, bound);
  }

  incumbent.nodes = nodes;
  incumbent.status = status;
  if (!stopped) {
    incumbent.lower_bound = incumbent.objective;
  } else {
    double lb = incumbent.objective;
    while (!open.empty()) {
      lb = std::min(lb, open.top().bound);
      open.pop();
    }
    incumbent.lower_bound = lb;
  }
  incumbent.gap = (incumbent.objective - incumbent.lower_bound) /
                  std::max(1.0, std::abs(incumbent.objective));
  incumbent.wall_time = elapsed();
  return incumbent;
}

double PrimalObjective(const Eigen::VectorXd& w, double b,
                       const Eigen::MatrixXd& features,
                       const std::vector<Bag>& bags, const CostWeights& cost) {
  double loss = 0.0;
  for (const Bag& bag : bags) {
    double best = -INFINITY;
    for (int i : bag.instances) best = std::max(best, features.row(i).dot(w) + b);
    loss += cost.ForLabel(bag.label) * std::max(0.0, 1.0 - bag.label * best);
  }
  return 0.5 * w.squaredNorm() + loss;
}

namespace {

// Convex soft-margin problem in which each positive bag is represented by
// its selected instance only.
SelectorOptimum SolveSelectorPrimal(const Eigen::MatrixXd& features,
                                    const std::vector<Bag>& bags,
                                    const CostWeights& cost,
                                    const std::vector<int>& selector) {
  const int dim = static_cast<int>(features.cols());
  const int nb = static_cast<int>(bags.size());
  std::vector<std::pair<int, int>> rows;  // (instance, bag)
  std::size_t next = 0;
  for (int b = 0; b < nb; ++b) {
    if (bags[b].label > 0) {
      rows.emplace_back(selector[next++], b);
    } else {
      for (int i : bags[b].instances) rows.emplace_back(i, b);
    }
  }
  const int nvar = dim + 1 + nb;
  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Zero(nvar, nvar);
  qp.hessian.topLeftCorner(dim, dim).setIdentity();
  qp.linear = Eigen::VectorXd::Zero(nvar);
  qp.lower = Eigen::VectorXd::Constant(nvar, -INFINITY);
  for (int b = 0; b < nb; ++b) {
    qp.linear(dim + 1 + b) = cost.ForLabel(bags[b].label);
    qp.lower(dim + 1 + b) = 0.0;
  }
  qp.ineq_matrix = Eigen::MatrixXd::Zero(rows.size(), nvar);
  qp.ineq_rhs = Eigen::VectorXd::Constant(rows.size(), -1.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto [i, b] = rows[r];
    const double y = bags[b].label;
    // -y (<w,z> + b) - xi <= -1
    qp.ineq_matrix.block(r, 0, 1, dim) = -y * features.row(i);
    qp.ineq_matrix(r, dim) = -y;
    qp.ineq_matrix(r, dim + 1 + b) = -1.0;
  }
  const QpSolution qs = SolveQp(qp);
  SelectorOptimum out;
  out.w = qs.x.head(dim);
  out.b = qs.x(dim);
  out.selector = selector;
  // Exact objective of (w, b) under this selector.
  double loss = 0.0;
  std::vector<double> need(nb, 0.0);
  for (const auto& [i, b] : rows) {
    const double margin = bags[b].label * (features.row(i).dot(out.w) + out.b);
    need[b] = std::max(need[b], 1.0 - margin);
  }
  for (int b = 0; b < nb; ++b) loss += cost.ForLabel(bags[b].label) * need[b];
  out.objective = 0.5 * out.w.squaredNorm() + loss;
  out.problems_solved = 1;
  return out;
}

}  // namespace

SelectorOptimum EnumerateSelectors(const Eigen::MatrixXd& features,
                                   const std::vector<Bag>& bags,
                                   const CostWeights& cost) {
  cost.Validate();
  std::vector<const Bag*> positive;
  std::int64_t combos = 1;
  for (const Bag& bag : bags) {
    if (bag.label < 0) continue;
    positive.push_back(&bag);
    combos *= static_cast<std::int64_t>(bag.instances.size());
    if (combos > kMaxEnumeratedSelectors) {
      throw DataError("enumerate_selectors: more than " +
                      std::to_string(kMaxEnumeratedSelectors) + " selectors");
    }
  }
  std::vector<std::size_t> digit(positive.size(), 0);
  SelectorOptimum best;
  std::int64_t solved = 0;
  while (true) {
    std::vector<int> selector;
    for (std::size_t q = 0; q < positive.size(); ++q) {
      selector.push_back(positive[q]->instances[digit[q]]);
    }
    SelectorOptimum cand = SolveSelectorPrimal(features, bags, cost, selector);
    ++solved;
    if (cand.objective < best.objective) best = std::move(cand);
    std::size_t q = 0;
    while (q < digit.size() && ++digit[q] == positive[q]->instances.size()) {
      digit[q++] = 0;
    }
    if (q == digit.size()) break;
  }
  best.problems_solved = solved;
  return best;
}

PrimalModel::PrimalModel(NystromMap map, Eigen::VectorXd w, double b)
    : map_(std::move(map)), w_(std::move(w)), b_(b) {
  if (w_.size() != map_.rank()) {
    throw DataError("primal model: w does not match the feature map rank");
  }
}

double PrimalModel::ScoreInstance(const DistInstance& instance) const {
  return ScoreEmbedding(map_.Embed(instance));
}

void MiqpConfig::Validate() const {
  kernel.Validate();
  cost.Validate();
  if (m1 < 0 || m2 < 0) throw DataError("miqp: m1, m2 must be >= 0");
  if (m1 > 0 && m2 > 0 && m1 > m2) throw DataError("miqp: need m1 <= m2");
  if (!(big_l > 0.0)) throw DataError("miqp: L must be positive");
  if (!(time_limit >= 0.0)) throw DataError("miqp: time limit must be >= 0");
}

MiqpFit FitMiqp(const Dataset& ds, const MiqpConfig& config) {
  config.Validate();
  if (ds.num_positive_bags() == 0 || ds.num_negative_bags() == 0) {
    throw DataError("miqp needs at least one positive and one negative bag");
  }
  const int m2 =
      config.m2 > 0 ? config.m2 : std::min(ds.num_samples(), kDefaultSubsample);
  const int m1 = config.m1 > 0 ? config.m1 : m2;
  if (m1 > m2) throw DataError("miqp: need m1 <= m2");
  std::mt19937_64 rng(config.seed);
  const Eigen::MatrixXd anchors = StratifiedSubsample(ds, m2, rng);
  NystromMap map = FitNystrom(anchors, config.kernel, m1);

  MiqpFit fit;
  fit.embeddings = map.EmbedAll(ds.instances());

  MiqpProblem problem;
  problem.features = fit.embeddings;
  problem.bags = ds.bags();
  problem.cost = config.cost;
  problem.big_l = config.big_l;
  problem.time_limit = config.time_limit;
  problem.node_limit = config.node_limit;
  MiqpSolution sol = BranchAndBound(problem);

  double shift = std::numeric_limits<double>::quiet_NaN();
  double used_l = config.big_l;
  if (config.check_big_l && sol.status == MiqpStatus::kOptimal &&
      problem.num_binaries() <= kBigLCheckMaxBinaries) {
    problem.big_l = 2.0 * config.big_l;
    MiqpSolution doubled = BranchAndBound(problem);
    if (doubled.status == MiqpStatus::kOptimal) {
      shift = doubled.objective - sol.objective;
      if (std::abs(shift) > 1e-6) {
        std::cerr << "warning: doubling L changed the MIQP objective by "
                  << shift << "; L=" << config.big_l
                  << " may be too small\n";
      }
      if (doubled.objective < sol.objective) {
        doubled.wall_time += sol.wall_time;
        doubled.nodes += sol.nodes;
        sol = std::move(doubled);
        used_l = problem.big_l;
      }
    }
  }
  fit.model = PrimalModel(std::move(map), sol.w, sol.b);
  fit.model.solution = std::move(sol);
  fit.model.big_l = used_l;
  fit.model.big_l_shift = shift;
  return fit;
}

}  // namespace mismm
