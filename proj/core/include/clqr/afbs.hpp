#pragma once

#include "clqr/bounds.hpp"
#include "clqr/dual_sequence.hpp"
#include "clqr/problem.hpp"
#include "clqr/riccati.hpp"
#include "clqr/stage_sets.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace clqr {

enum class StepsizeMode { Fixed, Backtracking };

struct IterateView;

struct SolverOptions {
  double a = 4.0;
  double tol = 1e-4;
  std::size_t max_iter = 200000;
  StepsizeMode stepsize_mode = StepsizeMode::Backtracking;
  double L0 = 1.0;
  double eta = 2.0;
  bool polish = true;
  double active_tol = 1e-6;
  std::size_t hitting_cap = kDefaultHittingCap;
  /// Overrides the offline bound in fixed mode.
  std::optional<double> fixed_L;
  /// Called once per iteration with lambda^{k+1} and its Lagrangian minimizer.
  std::function<void(const IterateView&)> observer;

  /// Throws std::invalid_argument unless a > 2, eta > 1, tol > 0, L0 > 0.
  void check() const;
};

struct IterationRecord {
  std::size_t k = 0;
  double alpha = 0.0;
  double L = 0.0;
  std::size_t T = 0;
  double dual_objective = 0.0;  ///< F(lambda^{k+1})
  double residual = 0.0;        ///< ||lambda^{k+1} - lambda_hat^k||_w
  std::size_t bt_trials = 0;
};

enum class SolveStatus { Converged, MaxIterExceeded };

struct SolveLog {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::Converged;

  /// Header "k,alpha,L,T,F_dual,residual,bt_trials" followed by one row per record.
  void write_csv(std::ostream& out) const;
};

struct IterateView {
  std::size_t k = 0;  ///< index of the iterate lambda^k (k >= 1)
  const DualSequence& lambda;
  const Trajectory& primal;
  double dual_objective = 0.0;
  double L = 0.0;
};

struct SolveResult {
  Trajectory trajectory;
  DualSequence dual;
  std::size_t T_inf = 0;
  std::size_t iterations = 0;
  SolveLog log;
  bool polished = false;
  bool polish_singular = false;  ///< KKT fell back to least squares
  bool stepsize_fallback = false;  ///< fixed mode requested without a bound
  double objective = 0.0;  ///< infinite-horizon cost of `trajectory`
  double max_violation = 0.0;  ///< over the stored horizon plus the tail up to S
  double dual_objective = 0.0;  ///< F at the returned dual
};

/// alpha^k = (k - 1) / (k + a) for k >= 1, alpha^0 = 0.
double momentum(std::size_t k, double a);

/// Blocks w^i [Cu u_i - cu; Cx x_{i+1} - cx] for i < support; extends the
/// trajectory with the LQ tail where needed.
BlockSequence dual_gradient(Trajectory& traj, const LtiProblem& problem,
                            const RiccatiData& riccati, std::size_t support);

/// Smooth part of a dual problem: h*(lambda) = -min_{x,u} Lagrangian.
/// The solver loop only talks to this interface, so the infinite-horizon
/// problem and fixed-horizon MPC share the same machinery.
class DualModel {
 public:
  virtual ~DualModel() = default;

  virtual Eigen::Index block_rows() const = 0;
  virtual double weight() const = 0;
  /// Minimizer of the Lagrangian for lambda supported within `horizon`.
  virtual Trajectory minimize_lagrangian(const DualSequence& lambda, std::size_t horizon) const = 0;
  /// Support for the next iterate given the current one and the minimizer.
  virtual std::size_t next_support(std::size_t prev, Trajectory& traj) const = 0;
  virtual BlockSequence gradient(Trajectory& traj, std::size_t support) const = 0;
  /// Primal cost of the Lagrangian minimizer (without multiplier terms).
  virtual double primal_cost(const Trajectory& traj) const = 0;
};

/// h*(lambda) = <lambda, grad> - cost, evaluated at a Lagrangian minimizer.
double dual_value(const DualModel& model, const DualSequence& lambda, Trajectory& traj);

class ClqrDualModel final : public DualModel {
 public:
  ClqrDualModel(const LtiProblem& problem, const RiccatiData& riccati, const EllipsoidS& S,
                std::size_t hitting_cap = kDefaultHittingCap)
      : problem_(problem), riccati_(riccati), S_(S), cap_(hitting_cap) {}

  Eigen::Index block_rows() const override { return problem_.block_rows(); }
  double weight() const override { return problem_.w; }
  Trajectory minimize_lagrangian(const DualSequence& lambda, std::size_t horizon) const override;
  std::size_t next_support(std::size_t prev, Trajectory& traj) const override;
  BlockSequence gradient(Trajectory& traj, std::size_t support) const override;
  double primal_cost(const Trajectory& traj) const override;

 private:
  const LtiProblem& problem_;
  const RiccatiData& riccati_;
  const EllipsoidS& S_;
  std::size_t cap_;
};

struct BacktrackOutcome {
  double L = 0.0;
  DualSequence lambda;
  Trajectory primal;
  double value = 0.0;
  std::size_t trials = 0;
};

/// Smallest L = eta^i L_prev (i >= 0) with
///   h*(p_L(y)) <= h*(y) + <p_L(y) - y, grad> + L/2 ||p_L(y) - y||^2,
/// p_L(y) = min(y - grad / L, 0) on `support` blocks. Throws
/// CurvatureOverflow once L exceeds 1e16.
BacktrackOutcome backtrack_step(const DualModel& model, const DualSequence& y, double value_y,
                                const BlockSequence& grad_y, std::size_t support, double L_prev,
                                double eta);

/// Accelerated dual forward-backward loop on a generic model, starting at
/// `start` with support `start_support` (>= start.support()). `fixed_L` is
/// used in fixed mode. The returned trajectory is the minimizer at the
/// final dual; no polish is applied.
SolveResult run_afbs(const DualModel& model, const SolverOptions& options,
                     const DualSequence& start, std::size_t start_support,
                     std::optional<double> fixed_L);

/// Offline data for repeated solves of one plant: DARE, S, Lipschitz bound.
class ClqrSolver {
 public:
  /// Throws ValidationFailed if a required assumption fails.
  explicit ClqrSolver(LtiProblem problem);

  const LtiProblem& problem() const { return problem_; }
  const RiccatiData& riccati() const { return riccati_; }
  const EllipsoidS& S() const { return S_; }
  const std::optional<LipschitzEstimate>& lipschitz() const { return lipschitz_; }

  /// Solves from the stored x_init. `warm` seeds lambda^0 and T^0.
  SolveResult solve(const SolverOptions& options, const DualSequence* warm = nullptr) const;
  SolveResult solve_from(const Vector& x_init, const SolverOptions& options,
                         const DualSequence* warm = nullptr) const;

 private:
  LtiProblem problem_;
  RiccatiData riccati_;
  EllipsoidS S_;
  std::optional<LipschitzEstimate> lipschitz_;
};

SolveResult solve(const LtiProblem& problem, const SolverOptions& options);

/// Re-solves the truncated problem as an equality-constrained QP over the
/// detected active rows (lambda entries below -active_tol), adding any rows
/// the re-solve violates. Replaces the trajectory of `result`.
SolveResult kkt_polish(SolveResult result, const LtiProblem& problem, const RiccatiData& riccati,
                       const EllipsoidS& S, double active_tol = 1e-6);

/// Largest constraint violation over the stored horizon and the LQ tail up
/// to the entry into S (or the default hitting cap when S is not reached).
double max_constraint_violation(const Trajectory& traj, const LtiProblem& problem,
                                const RiccatiData& riccati, const EllipsoidS& S);

}  // namespace clqr
