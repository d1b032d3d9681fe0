#include "clqr/afbs.hpp"
#include "clqr/errors.hpp"
#include "clqr/stage_sets.hpp"
#include "clqr/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace clqr {
namespace {

// Violation over the stored horizon and a long LQ tail, computed directly.
double tail_violation(Trajectory traj, const LtiProblem& p, const RiccatiData& ric) {
  extend_lq_tail(traj, p.A, p.B, ric.K, traj.horizon + 400);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.inputs.size(); ++i) {
    worst = std::max(worst, (p.Cu * traj.inputs[i] - p.cu).maxCoeff());
    worst = std::max(worst, (p.Cx * traj.states[i + 1] - p.cx).maxCoeff());
  }
  return worst;
}

TEST(Polish, EmptyActiveSetLeavesLqTrajectory) {
  Vector x(2);
  x << 0.5, -0.1;
  const LtiProblem p = toy_system(x);
  const ClqrSolver solver(p);
  SolverOptions opts;
  opts.polish = false;
  const SolveResult raw = solver.solve(opts);
  for (const auto& b : raw.dual.blocks) ASSERT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  const SolveResult pol = kkt_polish(raw, solver.problem(), solver.riccati(), solver.S());
  Trajectory a = raw.trajectory, b = pol.trajectory;
  const std::size_t N = std::max(a.horizon, b.horizon);
  extend_lq_tail(a, p.A, p.B, solver.riccati().K, N);
  extend_lq_tail(b, p.A, p.B, solver.riccati().K, N);
  for (std::size_t i = 0; i < N; ++i) {
    EXPECT_LT((a.inputs[i] - b.inputs[i]).norm(), 1e-10);
    EXPECT_LT((a.states[i + 1] - b.states[i + 1]).norm(), 1e-10);
  }
}

// With u_0 pinned at the lower bound the rest of the optimal trajectory is
// the LQ law from x_1, which gives a closed-form reference.
TEST(Polish, PinnedInputMatchesClosedForm) {
  const double x0 = 8.0;
  const LtiProblem p = scalar_system(0.5, 1.0, 1.0, 1.0, 1.0, 10.0, x0);
  const ClqrSolver solver(p);
  const RiccatiData& ric = solver.riccati();
  ASSERT_LT(ric.K(0, 0) * x0, -1.0);  // the LQ input would violate the bound

  SolverOptions opts;
  opts.polish = false;
  const SolveResult raw = solver.solve(opts);
  ASSERT_GE(raw.dual.support(), 1u);
  ASSERT_LT(raw.dual.blocks[0](1), -1e-6);  // lower input row of block 0
  const SolveResult pol = kkt_polish(raw, p, ric, solver.S());

  EXPECT_EQ(pol.trajectory.inputs[0](0), -1.0);
  const double x1 = 0.5 * x0 - 1.0;
  EXPECT_NEAR(pol.trajectory.states[1](0), x1, 1e-12);
  Trajectory t = pol.trajectory;
  extend_lq_tail(t, p.A, p.B, ric.K, 10);
  double x = x1;
  for (std::size_t i = 1; i < 10; ++i) {
    EXPECT_NEAR(t.inputs[i](0), ric.K(0, 0) * x, 1e-10);
    x = ric.A_cl(0, 0) * x;
  }
  const double cost = 0.5 * (x0 * x0 + 1.0) + 0.5 * ric.P(0, 0) * x1 * x1;
  EXPECT_NEAR(pol.objective, cost, 1e-10);
}

TEST(Polish, ToyViolationVanishes) {
  const ClqrSolver solver(toy_system());
  const LtiProblem& p = solver.problem();
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gx(-3.0, 2.0), gv(0.3, std::sqrt(0.4));
  SolverOptions opts;
  int solved = 0;
  for (int s = 0; s < 30 && solved < 10; ++s) {
    Vector x(2);
    x << gx(rng), gv(rng);
    SolveResult res;
    try {
      res = solver.solve_from(x, opts);
    } catch (const ClqrError&) {
      continue;
    }
    if (res.log.status != SolveStatus::Converged) continue;
    ++solved;
    EXPECT_TRUE(res.polished);
    EXPECT_LE(res.max_violation, 1e-8);
    EXPECT_LE(tail_violation(res.trajectory, p, solver.riccati()), 1e-8);
  }
  EXPECT_GE(solved, 5);
}

TEST(Polish, MaxConstraintViolationSeesTail) {
  const LtiProblem p = toy_system();
  const ClqrSolver solver(p);
  SolverOptions opts;
  opts.polish = false;
  const SolveResult raw = solver.solve(opts);
  EXPECT_NEAR(max_constraint_violation(raw.trajectory, p, solver.riccati(), solver.S()),
              std::max(0.0, tail_violation(raw.trajectory, p, solver.riccati())), 1e-12);
}

}  // namespace
}  // namespace clqr
