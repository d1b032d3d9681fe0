#include "clqr/mpc.hpp"

#include "clqr/errors.hpp"

#include <stdexcept>

namespace clqr {

MpcDualModel::MpcDualModel(const LtiProblem& problem, const RiccatiData& riccati,
                           std::size_t horizon, const PolytopeSet* terminal_set)
    : problem_(problem), riccati_(riccati), horizon_(horizon), terminal_(terminal_set) {
  if (horizon == 0) throw std::invalid_argument("MPC horizon must be at least 1");
}

Trajectory MpcDualModel::minimize_lagrangian(const DualSequence& lambda, std::size_t) const {
  const auto pu = problem_.pu();
  const auto px = problem_.px();
  LinearTerms terms;
  const std::size_t stages = std::min(lambda.support(), horizon_);
  for (std::size_t i = 0; i < stages; ++i) {
    const Vector& blk = lambda.blocks[i];
    terms.input.push_back(-(problem_.Cu.transpose() * blk.head(pu)));
    terms.state.push_back(-(problem_.Cx.transpose() * blk.segment(pu, px)));
  }
  if (terminal_ && lambda.support() > horizon_) {
    terms.input.resize(horizon_, Vector::Zero(problem_.m()));
    terms.state.resize(horizon_, Vector::Zero(problem_.n()));
    terms.state[horizon_ - 1] -= terminal_->G.transpose() * lambda.blocks[horizon_];
  }
  return solve_lq_with_terms(problem_, riccati_, horizon_, terms);
}

std::size_t MpcDualModel::next_support(std::size_t, Trajectory&) const { return support(); }

BlockSequence MpcDualModel::gradient(Trajectory& traj, std::size_t support) const {
  const auto pu = problem_.pu();
  const auto px = problem_.px();
  BlockSequence g;
  const std::size_t stages = std::min(support, horizon_);
  for (std::size_t i = 0; i < stages; ++i) {
    Vector blk(pu + px);
    blk.head(pu) = problem_.Cu * traj.inputs[i] - problem_.cu;
    blk.tail(px) = problem_.Cx * traj.states[i + 1] - problem_.cx;
    g.push_back(std::move(blk));
  }
  if (terminal_ && support > horizon_) {
    g.push_back(terminal_->G * traj.states[horizon_] - terminal_->g);
  }
  return g;
}

double MpcDualModel::primal_cost(const Trajectory& traj) const {
  return lq_cost(problem_, riccati_, traj);
}

LtiProblem unweighted(const LtiProblem& problem) {
  LtiProblem p = problem;
  p.w = 1.0;
  return p;
}

std::size_t find_Tmin(const LtiProblem& problem, const RiccatiData& riccati,
                      const PolytopeSet& mpi, std::size_t T_cap, TminRule rule) {
  if (T_cap == 0) throw std::invalid_argument("T_cap must be at least 1");
  const LtiProblem p = unweighted(problem);
  const bool with_set = rule == TminRule::TerminalSetFeasible;
  for (std::size_t T = 1; T <= T_cap; ++T) {
    const TruncatedQp qp = build_truncation(p, riccati, T, with_set ? &mpi : nullptr);
    const QpSolution sol = dual_active_set_qp(qp.H, qp.h, qp.C, qp.c);
    if (sol.status != QpStatus::Optimal) continue;
    const Vector xT = qp.trajectory(sol.u).states[T];
    if (mpi.contains(xT, 1e-9)) return T;
  }
  throw ClqrError(ErrorKind::NotFound,
                  "no horizon up to " + std::to_string(T_cap) + " ends inside the MPI set");
}

std::size_t find_Tstar(const LtiProblem& problem, const RiccatiData& riccati,
                       const PolytopeSet& mpi, std::size_t T_cap, double active_tol,
                       std::size_t T_from) {
  if (T_cap == 0) throw std::invalid_argument("T_cap must be at least 1");
  const LtiProblem p = unweighted(problem);
  for (std::size_t T = std::max<std::size_t>(T_from, 1); T <= T_cap; ++T) {
    const TruncatedQp qp = build_truncation(p, riccati, T, &mpi);
    const QpSolution sol = dual_active_set_qp(qp.H, qp.h, qp.C, qp.c);
    if (sol.status != QpStatus::Optimal) continue;
    const Vector slack =
        qp.c.tail(qp.terminal_rows) - qp.C.bottomRows(qp.terminal_rows) * sol.u;
    const Vector mult = sol.multipliers.tail(qp.terminal_rows);
    if ((slack.array() > 1e-8).all() && (mult.array().abs() < active_tol).all()) return T;
  }
  throw ClqrError(ErrorKind::NotFound,
                  "no horizon up to " + std::to_string(T_cap) + " leaves the terminal set inactive");
}

bool mpc_feasible(const LtiProblem& problem, const RiccatiData& riccati, std::size_t horizon,
                  const PolytopeSet* terminal_set) {
  const TruncatedQp qp = build_truncation(unweighted(problem), riccati, horizon, terminal_set);
  return dual_active_set_qp(qp.H, qp.h, qp.C, qp.c).status == QpStatus::Optimal;
}

bool is_feasible_start(const ClqrSolver& solver, const Vector& x, std::size_t T_cap) {
  LtiProblem p = unweighted(solver.problem());
  p.x_init = x;
  const TruncatedQp qp = build_truncation(p, solver.riccati(), T_cap);
  const QpSolution sol = dual_active_set_qp(qp.H, qp.h, qp.C, qp.c);
  if (sol.status != QpStatus::Optimal) return false;
  return solver.S().contains_strictly(qp.trajectory(sol.u).states[T_cap]);
}

SolveResult solve_mpc(MpcScenario& scenario, const RiccatiData& riccati,
                      const SolverOptions& options) {
  if (scenario.problem == nullptr) throw std::invalid_argument("scenario has no problem");
  const LtiProblem p = unweighted(*scenario.problem);
  const PolytopeSet* terminal = scenario.terminal_set ? &*scenario.terminal_set : nullptr;

  SolveResult res;
  if (!mpc_feasible(p, riccati, scenario.horizon, terminal)) {
    scenario.feasible = false;
    scenario.iterations = 0;
    return res;
  }

  const MpcDualModel model(p, riccati, scenario.horizon, terminal);
  SolverOptions opts = options;
  std::optional<double> fixed_L;
  if (opts.stepsize_mode == StepsizeMode::Fixed) {
    if (opts.fixed_L) {
      fixed_L = opts.fixed_L;
    } else {
      opts.stepsize_mode = StepsizeMode::Backtracking;
      res.stepsize_fallback = true;
    }
  }
  const bool fallback = res.stepsize_fallback;
  res = run_afbs(model, opts, DualSequence{}, model.support(), fixed_L);
  res.stepsize_fallback = fallback;
  res.objective = lq_cost(p, riccati, res.trajectory);
  scenario.iterations = res.iterations;
  scenario.feasible = res.log.records.empty() || res.log.records.back().residual <= 1e6;
  return res;
}

}  // namespace clqr
