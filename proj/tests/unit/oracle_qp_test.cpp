#include "clqr/afbs.hpp"
#include "clqr/errors.hpp"
#include "clqr/oracle_qp.hpp"
#include "clqr/systems.hpp"

#include "dense_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace clqr {
namespace {

TEST(Truncation, SingleStageHessian) {
  const LtiProblem p = scalar_system(0.5, 1.0, 1.0, 1.0, 1.0, 10.0, 2.0);
  const RiccatiData ric = solve_dare(p);
  const TruncatedQp qp = build_truncation(p, ric, 1);
  ASSERT_EQ(qp.H.rows(), 1);
  EXPECT_NEAR(qp.H(0, 0), 1.0 + ric.P(0, 0), 1e-14);
  EXPECT_THROW(build_truncation(p, ric, 0), std::invalid_argument);
}

TEST(Truncation, OriginHasNoLinearTerm) {
  const LtiProblem p = toy_system(Vector::Zero(2));
  const TruncatedQp qp = build_truncation(p, solve_dare(p), 5);
  EXPECT_EQ(qp.h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(qp.constant, 0.0);
}

TEST(Truncation, TwoStageScalarCondensation) {
  const double a = 0.5, x0 = 3.0;
  const LtiProblem p = scalar_system(a, 1.0, 1.0, 1.0, 1.0, 10.0, x0);
  const RiccatiData ric = solve_dare(p);
  const double P = ric.P(0, 0);
  const TruncatedQp qp = build_truncation(p, ric, 2);
  // x1 = a x0 + u0, x2 = a^2 x0 + a u0 + u1.
  Matrix H(2, 2);
  H << 1.0 + 1.0 + P * a * a, P * a, P * a, 1.0 + P;
  Vector h(2);
  h << a * x0 + P * a * a * a * x0, P * a * a * x0;
  EXPECT_LT((qp.H - H).norm(), 1e-13);
  EXPECT_LT((qp.h - h).norm(), 1e-13);
  EXPECT_NEAR(qp.constant, 0.5 * (x0 * x0 + a * a * x0 * x0 + P * std::pow(a, 4) * x0 * x0), 1e-12);
  // Rows: [u0 <= 1, -u0 <= 1, x1 <= 10, -x1 <= 10] then stage 1 scaled by w = 1.
  ASSERT_EQ(qp.C.rows(), 8);
  EXPECT_NEAR(qp.C(2, 0), 1.0, 1e-15);
  EXPECT_NEAR(qp.c(2), 10.0 - a * x0, 1e-14);
  EXPECT_NEAR(qp.C(6, 0), a, 1e-15);
  EXPECT_NEAR(qp.C(6, 1), 1.0, 1e-15);
}

TEST(Truncation, StageRowsCarryWeights) {
  const LtiProblem p = toy_system();
  const TruncatedQp qp = build_truncation(p, solve_dare(p), 3);
  const Eigen::Index rows = p.block_rows();
  EXPECT_NEAR(qp.C(2 * rows, 2) / qp.C(0, 0), p.w * p.w, 1e-14);
  EXPECT_NEAR(qp.c(2 * rows) / qp.c(0), p.w * p.w, 1e-14);
}

TEST(Oracle, UnconstrainedOptimumHasZeroMultipliers) {
  Vector x(2);
  x << 0.3, -0.1;
  const LtiProblem p = toy_system(x);
  const TruncatedQp qp = build_truncation(p, solve_dare(p), 4);
  const OracleSolution sol = oracle_solve(qp);
  const Vector u = -qp.H.ldlt().solve(qp.h);
  EXPECT_LT((sol.u - u).norm(), 1e-9);
  for (const auto& b : sol.lambda.blocks) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(sol.F_star, -sol.primal, 1e-15);
}

TEST(Oracle, EnumerationPicksTheNecessarilyActiveBound) {
  const LtiProblem p = scalar_system(0.5, 1.0, 1.0, 1.0, 1.0, 10.0, 8.0);
  const TruncatedQp qp = build_truncation(p, solve_dare(p), 1);
  ASSERT_LE(qp.C.rows(), kEnumerationMaxRows);
  const OracleSolution sol = oracle_solve(qp);
  EXPECT_EQ(sol.cross_check, "enumeration");
  EXPECT_NEAR(sol.u(0), -1.0, 1e-12);
  EXPECT_LT(sol.lambda.blocks[0](1), 0.0);
  EXPECT_EQ(sol.lambda.blocks[0](0), 0.0);
}

TEST(Oracle, InfeasibleTruncationThrows) {
  LtiProblem p = scalar_system(0.5, 1.0, 1.0, 1.0, 0.1, 1.0, 9.0);
  const TruncatedQp qp = build_truncation(p, solve_dare(p), 2);
  try {
    oracle_solve(qp);
    FAIL();
  } catch (const ClqrError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  EXPECT_EQ(dual_active_set_qp(qp.H, qp.h, qp.C, qp.c).status, QpStatus::Infeasible);
  EXPECT_THROW(oracle_solve(qp, 1e-6), std::invalid_argument);
}

TEST(Oracle, TruncationStableAndStronglyDual) {
  const ClqrSolver solver(toy_system());
  const LtiProblem& p = solver.problem();
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gx(-3.0, 2.0), gv(0.3, std::sqrt(0.4));
  int checked = 0;
  for (int s = 0; s < 40 && checked < 5; ++s) {
    Vector x(2);
    x << gx(rng), gv(rng);
    SolveResult res;
    try {
      res = solver.solve_from(x, SolverOptions{});
    } catch (const ClqrError&) {
      continue;
    }
    if (res.log.status != SolveStatus::Converged || res.T_inf < 2) continue;
    LtiProblem px = p;
    px.x_init = x;
    const std::size_t T = res.T_inf + 20;
    OracleSolution a, b;
    try {
      a = oracle_solve(build_truncation(px, solver.riccati(), T));
      b = oracle_solve(build_truncation(px, solver.riccati(), T + 10));
    } catch (const ClqrError&) {
      continue;
    }
    ++checked;
    EXPECT_NEAR(a.F_star, b.F_star, 1e-9 * std::max(1.0, std::abs(a.F_star)));

    const ClqrDualModel model(px, solver.riccati(), solver.S());
    Trajectory traj = model.minimize_lagrangian(a.lambda, T);
    EXPECT_NEAR(dual_value(model, a.lambda, traj), -a.primal, 1e-8 * std::max(1.0, a.primal));
    EXPECT_NEAR(testing::dense_dual_value(px, solver.riccati().P, T, a.lambda), -a.primal,
                1e-8 * std::max(1.0, a.primal));
  }
  EXPECT_GE(checked, 3);
}

TEST(QpSolvers, ActiveSetAndProjectedGradientMatchEnumeration) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const int rows = 2 + trial % 10;
    Matrix L(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) L(i, j) = g(rng);
    }
    const Matrix H = L * L.transpose() + 0.1 * Matrix::Identity(n, n);
    Vector h(n);
    for (int i = 0; i < n; ++i) h(i) = 3.0 * g(rng);
    Matrix C(rows, n);
    Vector c(rows);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < n; ++j) C(r, j) = g(rng);
      c(r) = std::abs(g(rng)) + 0.1;  // origin strictly feasible
    }
    const QpSolution ref = enumerate_active_sets(H, h, C, c);
    const QpSolution gi = dual_active_set_qp(H, h, C, c);
    const QpSolution pg = dual_projected_gradient_qp(H, h, C, c, 1e-11);
    ASSERT_EQ(gi.status, QpStatus::Optimal);
    EXPECT_LT((gi.u - ref.u).norm(), 1e-8) << "trial " << trial;
    EXPECT_LT((pg.u - ref.u).norm(), 1e-7) << "trial " << trial;
    EXPECT_NEAR(gi.objective, ref.objective, 1e-9 * std::max(1.0, std::abs(ref.objective)));
    EXPECT_GE(gi.multipliers.minCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace clqr
