#pragma once

#include "clqr/afbs.hpp"
#include "clqr/oracle_qp.hpp"
#include "clqr/problem.hpp"
#include "clqr/riccati.hpp"
#include "clqr/stage_sets.hpp"

#include <cstddef>
#include <optional>

namespace clqr {

/// Finite-horizon MPC instance: stage constraints on i < T, terminal cost
/// P_LQ and an optional terminal set on x_T. MPC is always unweighted.
struct MpcScenario {
  std::size_t horizon = 1;
  std::optional<PolytopeSet> terminal_set;
  const LtiProblem* problem = nullptr;
  std::size_t iterations = 0;
  bool feasible = true;
};

/// Dual of the finite-horizon problem: one block per stage plus a terminal
/// block when a terminal set is present. The support never changes.
class MpcDualModel final : public DualModel {
 public:
  MpcDualModel(const LtiProblem& problem, const RiccatiData& riccati, std::size_t horizon,
               const PolytopeSet* terminal_set);

  std::size_t support() const { return horizon_ + (terminal_ ? 1 : 0); }

  Eigen::Index block_rows() const override { return problem_.block_rows(); }
  double weight() const override { return 1.0; }
  /// The horizon argument is ignored: the model's own horizon is used.
  Trajectory minimize_lagrangian(const DualSequence& lambda, std::size_t horizon) const override;
  std::size_t next_support(std::size_t prev, Trajectory& traj) const override;
  BlockSequence gradient(Trajectory& traj, std::size_t support) const override;
  double primal_cost(const Trajectory& traj) const override;

 private:
  const LtiProblem& problem_;
  const RiccatiData& riccati_;
  std::size_t horizon_;
  const PolytopeSet* terminal_;
};

/// Copy of `problem` with w = 1.
LtiProblem unweighted(const LtiProblem& problem);

enum class TminRule {
  /// Smallest horizon whose problem with terminal set `mpi` is feasible,
  /// i.e. whose optimal x_T lies in the set.
  TerminalSetFeasible,
  /// Smallest horizon whose optimum without terminal constraint ends in
  /// `mpi`. With terminal cost P_LQ this generically coincides with T_star.
  UnconstrainedEndsInSet,
};

/// Linear scan from T = 1 up to T_cap. Throws NotFound.
std::size_t find_Tmin(const LtiProblem& problem, const RiccatiData& riccati,
                      const PolytopeSet& mpi, std::size_t T_cap,
                      TminRule rule = TminRule::TerminalSetFeasible);

/// Smallest T in [T_from, T_cap] whose finite-horizon problem with terminal
/// set `mpi` is feasible with every terminal row inactive (slack > 1e-8 and
/// multiplier below active_tol). Throws NotFound.
std::size_t find_Tstar(const LtiProblem& problem, const RiccatiData& riccati,
                       const PolytopeSet& mpi, std::size_t T_cap, double active_tol = 1e-6,
                       std::size_t T_from = 1);

/// True when the finite-horizon QP (with the scenario's terminal set) has a
/// feasible point.
bool mpc_feasible(const LtiProblem& problem, const RiccatiData& riccati, std::size_t horizon,
                  const PolytopeSet* terminal_set);

/// True when the T_cap-horizon QP from x is feasible with its final state
/// inside int S, which certifies a feasible infinite-horizon continuation.
bool is_feasible_start(const ClqrSolver& solver, const Vector& x, std::size_t T_cap);

/// Runs the accelerated dual loop on the scenario. Infeasible instances are
/// detected up front by the dense active-set QP and returned with
/// `feasible = false` and no iterations; a run whose residual exceeds 1e6
/// is also flagged infeasible. Fixed mode falls back to backtracking
/// unless `options.fixed_L` is set.
SolveResult solve_mpc(MpcScenario& scenario, const RiccatiData& riccati,
                      const SolverOptions& options);

}  // namespace clqr
