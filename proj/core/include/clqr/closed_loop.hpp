#pragma once

#include "clqr/afbs.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace clqr {

struct ClosedLoopStep {
  std::size_t step = 0;
  std::size_t iterations = 0;
  std::size_t T_inf = 0;
  bool feasible = true;
  Vector x;   ///< state the step was solved from (after perturbation)
  Vector u0;  ///< applied input
};

struct ClosedLoopRun {
  std::size_t steps = 15;
  double perturbation = 0.0;  ///< relative magnitude, e.g. 0.01 for 1%
  bool warm = false;
  /// When positive, each state is screened with is_feasible_start at this
  /// horizon before solving, so infeasible steps fail fast.
  std::size_t feasibility_horizon = 0;
  std::vector<ClosedLoopStep> records;
  /// Step at which the solver failed; the run stops there.
  std::optional<std::size_t> failed_step;

  /// Header "step,iters,T_inf,feasible,u0_0,..." and one row per record.
  void write_csv(std::ostream& out) const;
};

/// Drops block 0 and moves the remaining blocks down by one position.
DualSequence shift_warm_start(const DualSequence& prev);

/// Closed-loop simulation from solver.problem().x_init: solve, apply u_0,
/// propagate the nominal model, then scale each state component by
/// (1 + delta) with delta ~ U[-perturbation, perturbation] drawn from `seed`.
/// Warm runs start each solve after the first from the shifted dual of the
/// previous one. A solver error or an unconverged solve marks the step
/// infeasible and ends the run.
ClosedLoopRun run_closed_loop(const ClqrSolver& solver, const SolverOptions& options,
                              ClosedLoopRun run, std::uint64_t seed);

/// Same as run_closed_loop, starting from `x_init` instead.
ClosedLoopRun run_closed_loop_from(const ClqrSolver& solver, const Vector& x_init,
                                   const SolverOptions& options, ClosedLoopRun run,
                                   std::uint64_t seed);

}  // namespace clqr
