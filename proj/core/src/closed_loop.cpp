#include "clqr/closed_loop.hpp"

#include "clqr/errors.hpp"
#include "clqr/mpc.hpp"

#include <ostream>
#include <random>
#include <string>

namespace clqr {

void ClosedLoopRun::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(12);
  const Eigen::Index m = records.empty() ? 0 : records.front().u0.size();
  out << "step,iters,T_inf,feasible";
  for (Eigen::Index j = 0; j < m; ++j) out << ",u0_" << j;
  out << '\n';
  for (const auto& r : records) {
    out << r.step << ',' << r.iterations << ',' << r.T_inf << ',' << (r.feasible ? 1 : 0);
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << (j < r.u0.size() ? r.u0(j) : 0.0);
    out << '\n';
  }
  out.precision(old_precision);
}

DualSequence shift_warm_start(const DualSequence& prev) {
  DualSequence out;
  if (prev.support() <= 1) return out;
  out.blocks.assign(prev.blocks.begin() + 1, prev.blocks.end());
  for (auto& blk : out.blocks) blk = blk.cwiseMin(0.0);
  return out;
}

ClosedLoopRun run_closed_loop(const ClqrSolver& solver, const SolverOptions& options,
                              ClosedLoopRun run, std::uint64_t seed) {
  return run_closed_loop_from(solver, solver.problem().x_init, options, std::move(run), seed);
}

ClosedLoopRun run_closed_loop_from(const ClqrSolver& solver, const Vector& x_init,
                                   const SolverOptions& options, ClosedLoopRun run,
                                   std::uint64_t seed) {
  const LtiProblem& p = solver.problem();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> delta(-run.perturbation, run.perturbation);

  run.records.clear();
  run.failed_step.reset();
  Vector x = x_init;
  DualSequence previous;
  for (std::size_t t = 0; t < run.steps; ++t) {
    ClosedLoopStep rec;
    rec.step = t;
    rec.x = x;
    SolveResult res;
    try {
      if (run.feasibility_horizon > 0 && !is_feasible_start(solver, x, run.feasibility_horizon)) {
        throw ClqrError(ErrorKind::StepInfeasible, "step " + std::to_string(t));
      }
      const DualSequence warm = shift_warm_start(previous);
      const bool use_warm = run.warm && t > 0;
      res = solver.solve_from(x, options, use_warm ? &warm : nullptr);
      rec.feasible = res.log.status == SolveStatus::Converged;
    } catch (const ClqrError&) {
      rec.feasible = false;
    }
    if (!rec.feasible) {
      rec.iterations = res.iterations;
      rec.u0 = Vector::Zero(p.m());
      run.records.push_back(std::move(rec));
      run.failed_step = t;
      break;
    }
    rec.iterations = res.iterations;
    rec.T_inf = res.T_inf;
    extend_lq_tail(res.trajectory, p.A, p.B, solver.riccati().K, 1);
    rec.u0 = res.trajectory.inputs[0];
    run.records.push_back(rec);
    previous = std::move(res.dual);

    x = p.A * x + p.B * rec.u0;
    // Draw every component even when the magnitude is zero so that runs with
    // the same seed consume the generator identically.
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) *= 1.0 + delta(rng);
  }
  return run;
}

}  // namespace clqr
