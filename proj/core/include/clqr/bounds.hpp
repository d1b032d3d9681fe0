#pragma once

#include "clqr/problem.hpp"
#include "clqr/riccati.hpp"

#include <optional>

namespace clqr {

/// Offline Lipschitz bound for the dual gradient,
///   L_global = bound_Hinv * (sigma_Cu + output_scale * hinf)^2,
/// with hinf the H-infinity norm of (state_scale * A, B, Cx).
///
/// For the wⁱ-weighted dual gradient used by the solver (stage i pairing
/// u_i with x_{i+1}), the state-constraint operator is the convolution with
/// impulse response Cx (wA)^k B, k >= 0, acting on (w^j u_j); hence
/// state_scale = w and output_scale = 1.
struct LipschitzEstimate {
  double L_global = 0.0;
  double sigma_Cu = 0.0;
  double hinf = 0.0;
  double state_scale = 1.0;
  double output_scale = 1.0;
  double bound_Hinv = 0.0;
};

/// sup over theta of sigma_max(C (e^{j theta} I - A)^{-1} B): 4096-point grid
/// on [0, 2 pi) followed by golden-section refinement until the bracket is
/// below `tol`. Returns the refined estimate without any safety inflation.
/// Throws UnstableSystem if rho(A) >= 1.
double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C, double tol = 1e-10,
                 int grid_points = 4096);

/// Relative inflation applied to the grid estimate inside lipschitz_bound.
inline constexpr double kHinfInflation = 1e-6;

/// Throws UnstableSystem when w A is not Schur stable.
LipschitzEstimate lipschitz_bound(const LtiProblem& problem);

/// Same as lipschitz_bound, but reports unavailability instead of throwing.
std::optional<LipschitzEstimate> try_lipschitz_bound(const LtiProblem& problem);

}  // namespace clqr
