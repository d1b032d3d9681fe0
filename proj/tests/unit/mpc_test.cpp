#include "clqr/mpc.hpp"
#include "clqr/errors.hpp"
#include "clqr/protocols.hpp"
#include "clqr/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace clqr {
namespace {

struct ToyFixture : ::testing::Test {
  LtiProblem p = unweighted(toy_system());
  RiccatiData ric = solve_dare(p);
  PolytopeSet mpi = compute_mpi_set(ric.A_cl, lq_constraint_polytope(p, ric));

  bool feasible_with_set(const LtiProblem& q, std::size_t T) const {
    const TruncatedQp qp = build_truncation(q, ric, T, &mpi);
    return dual_active_set_qp(qp.H, qp.h, qp.C, qp.c).status == QpStatus::Optimal;
  }

  // Walks down from T_cap while the terminal-set problem stays feasible.
  std::size_t tmin_descending(const LtiProblem& q, std::size_t T_cap) const {
    std::size_t best = T_cap;
    for (std::size_t T = T_cap; T >= 1 && feasible_with_set(q, T); --T) best = T;
    return best;
  }
};

TEST_F(ToyFixture, OriginNeedsOneStep) {
  LtiProblem q = p;
  q.x_init = Vector::Zero(2);
  EXPECT_EQ(find_Tmin(q, ric, mpi, 10), 1u);
  EXPECT_EQ(find_Tmin(q, ric, mpi, 10, TminRule::UnconstrainedEndsInSet), 1u);
  EXPECT_EQ(find_Tstar(q, ric, mpi, 10), 1u);
}

TEST_F(ToyFixture, InteriorPointNeedsOneStep) {
  LtiProblem q = p;
  q.x_init = Vector(2);
  q.x_init << 0.2, -0.05;
  ASSERT_LT(mpi.max_violation(q.x_init), -0.1);
  EXPECT_EQ(find_Tmin(q, ric, mpi, 10), 1u);
  EXPECT_EQ(find_Tstar(q, ric, mpi, 10), 1u);
}

TEST_F(ToyFixture, TminMatchesDescendingScan) {
  LtiProblem q = p;
  q.x_init = Vector(2);
  q.x_init << -3.0, 0.3;
  const std::size_t T_cap = 60;
  EXPECT_EQ(find_Tmin(q, ric, mpi, T_cap), tmin_descending(q, T_cap));
}

TEST_F(ToyFixture, TstarNeverBelowTmin) {
  const ClqrSolver solver(toy_system());
  SamplingSpec spec = SamplingSpec::toy();
  const auto starts = sample_initial_states(solver, spec, 20, 3);
  ASSERT_GE(starts.size(), 15u);
  for (const Vector& x : starts) {
    LtiProblem q = p;
    q.x_init = x;
    const std::size_t tmin = find_Tmin(q, ric, mpi, 80);
    const std::size_t tstar = find_Tstar(q, ric, mpi, 80);
    EXPECT_GE(tstar, tmin);
    EXPECT_EQ(tmin, tmin_descending(q, 80));
    EXPECT_GE(find_Tmin(q, ric, mpi, 80, TminRule::UnconstrainedEndsInSet), tmin);
  }
}

TEST_F(ToyFixture, UnconstrainedInstanceTakesOneIteration) {
  LtiProblem q = p;
  q.x_init = Vector(2);
  q.x_init << 0.2, -0.05;
  MpcScenario sc;
  sc.horizon = 5;
  sc.problem = &q;
  const SolveResult res = solve_mpc(sc, ric, SolverOptions{});
  EXPECT_TRUE(sc.feasible);
  EXPECT_EQ(sc.iterations, 1u);
  Vector x = q.x_init;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_LT((res.trajectory.inputs[i] - ric.K * x).norm(), 1e-10);
    x = ric.A_cl * x;
  }
}

TEST_F(ToyFixture, InactiveTerminalSetChangesNothing) {
  LtiProblem q = p;
  q.x_init = Vector(2);
  q.x_init << -3.0, 0.3;
  const std::size_t tstar = find_Tstar(q, ric, mpi, 80, 1e-6, find_Tmin(q, ric, mpi, 80));
  const OracleSolution with = oracle_solve(build_truncation(q, ric, tstar, &mpi));
  const OracleSolution without = oracle_solve(build_truncation(q, ric, tstar));
  EXPECT_LT((with.u - without.u).cwiseAbs().maxCoeff(), 1e-6);

  SolverOptions opts;
  opts.tol = 1e-9;
  opts.polish = false;
  MpcScenario a{tstar, mpi, &q};
  MpcScenario b{tstar, std::nullopt, &q};
  const SolveResult ra = solve_mpc(a, ric, opts);
  const SolveResult rb = solve_mpc(b, ric, opts);
  for (std::size_t i = 0; i < tstar; ++i) {
    EXPECT_LT((ra.trajectory.inputs[i] - rb.trajectory.inputs[i]).norm(), 1e-6) << i;
    EXPECT_LT((ra.trajectory.inputs[i] - with.trajectory.inputs[i]).norm(), 1e-6) << i;
  }
}

TEST_F(ToyFixture, InfeasibleScenarioIsFlagged) {
  LtiProblem q = p;
  q.x_init = Vector(2);
  q.x_init << -6.0, 1.5;
  MpcScenario sc{1, mpi, &q};
  ASSERT_FALSE(mpc_feasible(q, ric, 1, &mpi));
  solve_mpc(sc, ric, SolverOptions{});
  EXPECT_FALSE(sc.feasible);
  EXPECT_EQ(sc.iterations, 0u);
}

// The infinite-horizon optimum is never worse than a terminal-set MPC plan
// evaluated with its LQ continuation.
TEST_F(ToyFixture, ClqrCostBelowTerminalSetMpcCost) {
  const ClqrSolver solver(toy_system());
  const auto starts = sample_initial_states(solver, SamplingSpec::toy(), 15, 5);
  for (const Vector& x : starts) {
    LtiProblem q = p;
    q.x_init = x;
    const std::size_t tmin = find_Tmin(q, ric, mpi, 80);
    const OracleSolution mpc = oracle_solve(build_truncation(q, ric, tmin, &mpi));
    const SolveResult clqr = solver.solve_from(x, SolverOptions{});
    ASSERT_EQ(clqr.log.status, SolveStatus::Converged);
    const OracleSolution inf = oracle_solve(build_truncation(q, ric, clqr.T_inf + 20));
    EXPECT_LE(inf.primal, mpc.primal + 1e-9 * std::max(1.0, mpc.primal));
  }
}

TEST(MpcCompare, TerminalSetNeedsMoreIterationsInMedian) {
  const ClqrSolver solver(toy_system());
  const auto starts = sample_initial_states(solver, SamplingSpec::toy(), 30, 9);
  const MpcCompareReport report = run_mpc_compare(solver, SolverOptions{}, starts, 80);
  EXPECT_GE(report.median_iters_mpc[0], report.median_iters_mpc[1]);
  EXPECT_STREQ(mpc_scenario_name(0), "Tmin_term");
}

}  // namespace
}  // namespace clqr
