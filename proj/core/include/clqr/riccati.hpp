#pragma once

#include "clqr/dual_sequence.hpp"
#include "clqr/problem.hpp"

#include <cstddef>
#include <vector>

namespace clqr {

/// Stabilizing DARE solution. Sign convention u = K x, so A_cl = A + B K.
struct RiccatiData {
  Matrix P;
  Matrix K;
  Matrix A_cl;
  /// (R + B' P B)^{-1}; constant along any recursion closed by P.
  Matrix stage_hessian_inv;
  double residual = 0.0;
  std::size_t sweeps = 0;
};

/// ||A'PA - P - A'PB (R + B'PB)^{-1} B'PA + Q|| in the induced inf-norm.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P);

/// Iterates the Riccati map from P = Q. Throws NonConvergence when the
/// residual stalls above 1e-9, the sweep budget (100000) runs out, or the
/// resulting closed loop is not Schur stable.
RiccatiData solve_dare(const LtiProblem& problem);

/// Linear cost terms sum_i r_i' u_i + sum_{i=1..T} s_i' x_i added to the
/// LQ cost. `input[i]` is r_i (i < T); `state[i]` is s_{i+1} (i < T).
/// Missing entries are zero.
struct LinearTerms {
  std::vector<Vector> input;
  std::vector<Vector> state;
};

/// Minimizes 1/2 x_T' P x_T + sum_{i<T} 1/2 (x_i'Qx_i + u_i'Ru_i) + terms
/// subject to the dynamics from x_init. Backward recursion of the affine
/// value-function terms (the quadratic part stays at P_LQ because the
/// recursion is closed by the DARE solution), then a forward rollout.
Trajectory solve_lq_with_terms(const LtiProblem& problem, const RiccatiData& riccati,
                               std::size_t horizon, const LinearTerms& terms);

/// Minimizer of the truncated Lagrangian
///   1/2 [x_T'P x_T + sum_{i<T} x_i'Qx_i + u_i'Ru_i]
///     - sum_{i<T} w^i [Cu u_i - cu; Cx x_{i+1} - cx]' lambda_i.
/// Requires lambda.support() <= horizon.
Trajectory solve_affine_lq(const LtiProblem& problem, const RiccatiData& riccati,
                           std::size_t horizon, const DualSequence& lambda);

/// 1/2 x_T'P x_T + sum_{i<T} 1/2 (x_i'Qx_i + u_i'Ru_i): the exact
/// infinite-horizon cost when the LQ law is used beyond the horizon.
double lq_cost(const LtiProblem& problem, const RiccatiData& riccati, const Trajectory& traj);

}  // namespace clqr
