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

#include "mismm/qp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "mismm/errors.h"

namespace mismm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// All inequalities written as rows of Ghat x <= hhat, with the bound rows
// kept implicit: general rows first, then -x_j <= -l_j, then x_j <= u_j.
class InequalitySystem {
 public:
  InequalitySystem(const QpProblem& p, int n) : p_(p), n_(n) {
    for (int j = 0; j < n; ++j) {
      if (p.lower.size() > 0 && std::isfinite(p.lower(j))) lower_.push_back(j);
      if (p.upper.size() > 0 && std::isfinite(p.upper(j))) upper_.push_back(j);
    }
    general_ = static_cast<int>(p.ineq_matrix.rows());
  }

  int size() const {
    return general_ + static_cast<int>(lower_.size() + upper_.size());
  }
  int general() const { return general_; }
  const std::vector<int>& lower() const { return lower_; }
  const std::vector<int>& upper() const { return upper_; }

  VectorXd Rhs() const {
    VectorXd h(size());
    if (general_ > 0) h.head(general_) = p_.ineq_rhs;
    int k = general_;
    for (int j : lower_) h(k++) = -p_.lower(j);
    for (int j : upper_) h(k++) = p_.upper(j);
    return h;
  }

  VectorXd Apply(const VectorXd& x) const {
    VectorXd out(size());
    if (general_ > 0) out.head(general_) = p_.ineq_matrix * x;
    int k = general_;
    for (int j : lower_) out(k++) = -x(j);
    for (int j : upper_) out(k++) = x(j);
    return out;
  }

  VectorXd ApplyTranspose(const VectorXd& z) const {
    VectorXd out = VectorXd::Zero(n_);
    if (general_ > 0) out = p_.ineq_matrix.transpose() * z.head(general_);
    int k = general_;
    for (int j : lower_) out(j) -= z(k++);
    for (int j : upper_) out(j) += z(k++);
    return out;
  }

  // Adds Ghat' diag(w) Ghat to `h`.
  void AddWeightedGram(const VectorXd& w, MatrixXd& h) const {
    if (general_ > 0) {
      const MatrixXd& g = p_.ineq_matrix;
      MatrixXd wg = w.head(general_).asDiagonal() * g;
      h.noalias() += g.transpose() * wg;
    }
    int k = general_;
    for (int j : lower_) h(j, j) += w(k++);
    for (int j : upper_) h(j, j) += w(k++);
  }

 private:
  const QpProblem& p_;
  int n_;
  int general_ = 0;
  std::vector<int> lower_;
  std::vector<int> upper_;
};

double InfNorm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double MaxStep(const VectorXd& v, const VectorXd& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  return step;
}

void Validate(const QpProblem& p) {
  const Eigen::Index n = p.linear.size();
  auto fail = [](const std::string& what) {
    throw DataError("qp: " + what);
  };
  if (p.hessian.rows() != n || p.hessian.cols() != n) fail("hessian shape");
  if (p.eq_matrix.rows() > 0 && p.eq_matrix.cols() != n) fail("A shape");
  if (p.eq_matrix.rows() != p.eq_rhs.size()) fail("b size");
  if (p.ineq_matrix.rows() > 0 && p.ineq_matrix.cols() != n) fail("G shape");
  if (p.ineq_matrix.rows() != p.ineq_rhs.size()) fail("h size");
  if (p.lower.size() != 0 && p.lower.size() != n) fail("lower size");
  if (p.upper.size() != 0 && p.upper.size() != n) fail("upper size");
}

}  // namespace

QpSolution SolveQp(const QpProblem& p, const QpOptions& options) {
  Validate(p);
  const int n = static_cast<int>(p.linear.size());
  const int meq = static_cast<int>(p.eq_matrix.rows());
  const InequalitySystem ineq(p, n);
  const int m = ineq.size();
  const VectorXd h = ineq.Rhs();

  const double q_scale = 1.0 + InfNorm(p.linear);
  const double p_scale = 1.0 + std::max(InfNorm(h), InfNorm(p.eq_rhs));

  VectorXd x = VectorXd::Zero(n);
  // Start inside finite boxes.
  for (int j = 0; j < n; ++j) {
    const double lo = p.lower.size() ? p.lower(j) : -INFINITY;
    const double hi = p.upper.size() ? p.upper(j) : INFINITY;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x(j) = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x(j) = std::max(0.0, lo + 1.0);
    } else if (std::isfinite(hi)) {
      x(j) = std::min(0.0, hi - 1.0);
    }
  }
  VectorXd y = VectorXd::Zero(meq);
  VectorXd s = (h - ineq.Apply(x)).cwiseMax(1.0);
  VectorXd z = VectorXd::Ones(m);

  QpSolution sol;
  double best_residual = std::numeric_limits<double>::infinity();
  QpSolution best;

  auto objective = [&](const VectorXd& v) {
    return 0.5 * v.dot(p.hessian * v) + p.linear.dot(v);
  };

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const VectorXd r_dual = p.hessian * x + p.linear +
                            (meq ? VectorXd(p.eq_matrix.transpose() * y)
                                 : VectorXd::Zero(n)) +
                            ineq.ApplyTranspose(z);
    const VectorXd r_eq = meq ? VectorXd(p.eq_matrix * x - p.eq_rhs)
                              : VectorXd(0);
    const VectorXd r_in = ineq.Apply(x) + s - h;
    const double gap = m ? s.dot(z) : 0.0;
    const double obj = objective(x);
    const double residual =
        std::max({InfNorm(r_dual) / q_scale,
                  std::max(InfNorm(r_eq), InfNorm(r_in)) / p_scale,
                  gap / (1.0 + std::abs(obj))});
    if (residual < best_residual) {
      best_residual = residual;
      best.x = x;
      best.eq_dual = y;
      best.ineq_dual = z;
      best.objective = obj;
      best.iterations = iter;
      best.residual = residual;
    }
    if (residual <= options.tolerance || iter == options.max_iterations) break;

    const double mu = m ? gap / m : 0.0;
    MatrixXd hmat = p.hessian;
    const VectorXd w = z.cwiseQuotient(s);
    ineq.AddWeightedGram(w, hmat);

    Eigen::LLT<MatrixXd> llt;
    double reg = 0.0;
    const double diag_scale = 1.0 + hmat.diagonal().cwiseAbs().maxCoeff();
    for (int attempt = 0; attempt < 12; ++attempt) {
      if (reg > 0.0) {
        MatrixXd shifted = hmat;
        shifted.diagonal().array() += reg;
        llt.compute(shifted);
      } else {
        llt.compute(hmat);
      }
      if (llt.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-14 * diag_scale : reg * 10.0;
    }
    if (llt.info() != Eigen::Success) break;

    MatrixXd h_inv_at;
    Eigen::LDLT<MatrixXd> schur;
    if (meq) {
      h_inv_at = llt.solve(p.eq_matrix.transpose());
      schur.compute(p.eq_matrix * h_inv_at);
    }

    // Newton direction for a given complementarity right-hand side.
    auto direction = [&](const VectorXd& r_sz, VectorXd& dx, VectorXd& dy,
                         VectorXd& dz, VectorXd& ds) {
      const VectorXd t = (z.cwiseProduct(r_in) - r_sz).cwiseQuotient(s);
      const VectorXd rhs = -r_dual - ineq.ApplyTranspose(t);
      const VectorXd u = llt.solve(rhs);
      if (meq) {
        dy = schur.solve(p.eq_matrix * u + r_eq);
        dx = u - h_inv_at * dy;
      } else {
        dy = VectorXd(0);
        dx = u;
      }
      const VectorXd gdx = ineq.Apply(dx);
      dz = w.cwiseProduct(gdx) + t;
      ds = -r_in - gdx;
    };

    VectorXd dx, dy, dz, ds;
    direction(s.cwiseProduct(z), dx, dy, dz, ds);
    if (m == 0) {
      x += dx;
      y += dy;
      continue;
    }
    const double step_aff = std::min(MaxStep(s, ds), MaxStep(z, dz));
    const double mu_aff =
        (s + step_aff * ds).dot(z + step_aff * dz) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    const VectorXd r_sz =
        s.cwiseProduct(z) + ds.cwiseProduct(dz) -
        VectorXd::Constant(m, sigma * mu);
    direction(r_sz, dx, dy, dz, ds);
    const double step =
        std::min(1.0, 0.99 * std::min(MaxStep(s, ds), MaxStep(z, dz)));
    if (!(step > 1e-14)) break;
    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    if (!x.allFinite() || !s.allFinite() || !z.allFinite()) break;
  }

  if (!(best_residual <= options.acceptable_tolerance)) {
    throw SolverError("qp: interior point did not converge (residual " +
                      std::to_string(best_residual) + ")");
  }
  best.lower_dual = VectorXd::Zero(n);
  best.upper_dual = VectorXd::Zero(n);
  int k = ineq.general();
  for (int j : ineq.lower()) best.lower_dual(j) = best.ineq_dual(k++);
  for (int j : ineq.upper()) best.upper_dual(j) = best.ineq_dual(k++);
  best.ineq_dual.conservativeResize(ineq.general());
  return best;
}

}  // namespace mismm
