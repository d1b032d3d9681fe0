#pragma once

#include "clqr/problem.hpp"
#include "clqr/riccati.hpp"

#include <cstddef>

namespace clqr {

/// S = {x : x' P x <= r2}.
struct EllipsoidS {
  Matrix P;
  double r2 = 0.0;

  double level(const Vector& x) const { return x.dot(P * x); }
  /// Strict interior with relative margin 1e-12.
  bool contains_strictly(const Vector& x) const { return level(x) < r2 * (1.0 - 1e-12); }
};

/// {x : G x <= g} with unit-norm rows.
struct PolytopeSet {
  Matrix G;
  Vector g;

  bool contains(const Vector& x, double tol = 0.0) const;
  /// max_j (G_j x - g_j); negative when strictly inside.
  double max_violation(const Vector& x) const;
};

/// Normalizes rows to unit Euclidean norm (zero rows are dropped).
PolytopeSet make_polytope(const Matrix& G, const Vector& g);

/// The LQ-admissible polytope {x : Cx x <= cx, Cu K x <= cu}.
PolytopeSet lq_constraint_polytope(const LtiProblem& problem, const RiccatiData& riccati);

/// Largest P_LQ sublevel set inside the LQ-admissible polytope, via the
/// support function of the ellipsoid: r2 = min_i b_i^2 / (g_i' P^{-1} g_i).
/// P_LQ is regularized by 1e-9 I if it is not positive definite.
/// Throws DegenerateSet if some offset b_i <= 0.
EllipsoidS compute_S(const RiccatiData& riccati, const LtiProblem& problem);

inline constexpr std::size_t kDefaultHittingCap = 10000;

/// Smallest i >= 0 with x_i in int S along x_{i+1} = A_cl x_i.
/// Throws CapExceeded if the cap is reached first.
std::size_t hitting_time(const RiccatiData& riccati, const EllipsoidS& S, const Vector& x_start,
                         std::size_t cap = kDefaultHittingCap);

/// Support update: the smallest T >= prev_T such that
///   Cx x_{i+1} < cx and Cu u_i < cu  for all i in {T, ..., T_S},
/// where T_S >= prev_T is the first index (after prev_T) with x in int S.
/// `traj` is extended in place with the LQ tail as far as needed.
std::size_t update_support(std::size_t prev_T, Trajectory& traj, const LtiProblem& problem,
                           const RiccatiData& riccati, const EllipsoidS& S,
                           std::size_t cap = kDefaultHittingCap);

/// Maximal positively invariant set of x+ = A_cl x inside `constraints`:
/// rows G A_cl^j x <= g are added while some of them is not redundant
/// (checked by LP over the current polytope). Throws NotConverged.
PolytopeSet compute_mpi_set(const Matrix& A_cl, const PolytopeSet& constraints,
                            std::size_t max_iter = 200);

}  // namespace clqr
