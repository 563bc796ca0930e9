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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mismm/errors.h"
#include "mismm/qp.h"

namespace mismm {
namespace {

TEST(SolveQp, BoxConstrainedQuadratic) {
  // min 1/2 |x - (2, -3)|^2 with 0 <= x <= 1
  QpProblem p;
  p.hessian = Eigen::MatrixXd::Identity(2, 2);
  p.linear = Eigen::Vector2d(-2, 3);
  p.lower = Eigen::Vector2d::Zero();
  p.upper = Eigen::Vector2d::Ones();
  const QpSolution s = SolveQp(p);
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
  EXPECT_NEAR(s.x(1), 0.0, 1e-8);
}

TEST(SolveQp, EqualityAndInequality) {
  // min x'x s.t. x1 + x2 = 1, x1 - x2 <= -0.5
  QpProblem p;
  p.hessian = 2 * Eigen::MatrixXd::Identity(2, 2);
  p.linear = Eigen::Vector2d::Zero();
  p.eq_matrix = Eigen::RowVector2d(1, 1);
  p.eq_rhs = Eigen::VectorXd::Ones(1);
  p.ineq_matrix = Eigen::RowVector2d(1, -1);
  p.ineq_rhs = Eigen::VectorXd::Constant(1, -0.5);
  const QpSolution s = SolveQp(p);
  EXPECT_NEAR(s.x(0), 0.25, 1e-8);
  EXPECT_NEAR(s.x(1), 0.75, 1e-8);
  EXPECT_NEAR(s.objective, 0.625, 1e-8);
}

TEST(SolveQp, RandomProblemsSatisfyKkt) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 30; ++t) {
    const int n = 3 + t % 6, m = 2 + t % 5;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    QpProblem p;
    p.hessian = a * a.transpose() / n;  // possibly singular-ish
    p.linear = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); });
    p.ineq_matrix = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return normal(rng); });
    p.ineq_rhs = Eigen::VectorXd::Ones(m);
    p.lower = Eigen::VectorXd::Constant(n, -2.0);
    p.upper = Eigen::VectorXd::Constant(n, 2.0);
    const QpSolution s = SolveQp(p);
    // Stationarity, feasibility and complementarity.
    const Eigen::VectorXd grad = p.hessian * s.x + p.linear +
                                 p.ineq_matrix.transpose() * s.ineq_dual -
                                 s.lower_dual + s.upper_dual;
    EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((p.ineq_matrix * s.x - p.ineq_rhs).maxCoeff(), 1e-8);
    EXPECT_GE(s.ineq_dual.minCoeff(), -1e-12);
    EXPECT_LE(std::abs(s.ineq_dual.dot(p.ineq_rhs - p.ineq_matrix * s.x)), 1e-6);
    EXPECT_GE((s.x - p.lower).minCoeff(), -1e-9);
    EXPECT_LE((s.x - p.upper).maxCoeff(), 1e-9);
  }
}

}  // namespace
}  // namespace mismm
