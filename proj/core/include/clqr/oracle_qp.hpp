#pragma once

#include "clqr/dual_sequence.hpp"
#include "clqr/problem.hpp"
#include "clqr/riccati.hpp"
#include "clqr/stage_sets.hpp"

#include <cstddef>
#include <string>

namespace clqr {

/// Dense condensed truncation of a CLQR instance in the stacked inputs
/// u = (u_0, ..., u_{T-1}):
///   minimize 1/2 u'Hu + h'u + constant  subject to  C u <= c,
/// with terminal cost P_LQ. Stage rows are scaled by w^i so that the
/// multipliers coincide (up to sign) with the solver's dual blocks; the
/// optional terminal-set rows on x_T are appended unscaled.
struct TruncatedQp {
  std::size_t horizon = 0;
  Matrix H;
  Vector h;
  Matrix C;
  Vector c;
  double constant = 0.0;
  Eigen::Index stage_rows = 0;  ///< rows per stage block (p_u + p_x)
  Eigen::Index terminal_rows = 0;
  /// x_i = state_map[i] x_init + input_map[i] u, i = 0..T.
  std::vector<Matrix> state_map;
  std::vector<Matrix> input_map;
  Vector x_init;

  double objective(const Vector& u) const { return 0.5 * u.dot(H * u) + h.dot(u) + constant; }
  Trajectory trajectory(const Vector& u) const;
};

/// Throws std::invalid_argument if horizon == 0.
TruncatedQp build_truncation(const LtiProblem& problem, const RiccatiData& riccati,
                             std::size_t horizon, const PolytopeSet* terminal_set = nullptr);

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  QpStatus status = QpStatus::Optimal;
  Vector u;
  Vector multipliers;  ///< >= 0, one per row of C
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Goldfarb-Idnani dual active-set method for strictly convex dense QPs
/// min 1/2 u'Hu + h'u s.t. C u <= c. Reports infeasibility instead of
/// throwing. Factorizations are recomputed from scratch at each step.
QpSolution dual_active_set_qp(const Matrix& H, const Vector& h, const Matrix& C, const Vector& c,
                              std::size_t max_iter = 100000);

/// Accelerated projected gradient on the dual min_{mu >= 0} 1/2 mu'M mu + q'mu
/// with adaptive restart and a periodic equality-constrained finish on the
/// current positive set. Stops at a projected-gradient residual below `tol`.
QpSolution dual_projected_gradient_qp(const Matrix& H, const Vector& h, const Matrix& C,
                                      const Vector& c, double tol,
                                      std::size_t max_iter = 2000000);

/// Exhaustive active-set enumeration; requires at most 12 rows.
QpSolution enumerate_active_sets(const Matrix& H, const Vector& h, const Matrix& C,
                                 const Vector& c);

inline constexpr Eigen::Index kEnumerationMaxRows = 12;
inline constexpr double kOracleAgreementTol = 1e-7;

struct OracleSolution {
  Vector u;
  Trajectory trajectory;
  /// Multipliers in the solver convention (<= 0): one block per stage plus,
  /// when present, one terminal block.
  DualSequence lambda;
  double primal = 0.0;  ///< objective including the constant
  double F_star = 0.0;  ///< optimal dual objective, equal to -primal
  std::string cross_check;  ///< "enumeration" or "active-set"
};

/// Solves the truncation with the projected-gradient path and cross-checks
/// it against enumeration (<= 12 rows) or the dual active-set method.
/// Throws OracleMismatch on disagreement beyond 1e-7 and Infeasible if the
/// truncation has no feasible point. Requires tol <= 1e-9.
OracleSolution oracle_solve(const TruncatedQp& qp, double tol = 1e-10);

}  // namespace clqr
