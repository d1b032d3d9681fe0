#pragma once

#include "clqr/problem.hpp"

namespace clqr {

enum class LpStatus { Optimal, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double value = 0.0;
  Vector x;
};

/// maximize c'x subject to G x <= h with x free, for h >= 0 (the origin is
/// feasible, so no phase-one is needed). Dense tableau simplex with Bland's
/// rule: deterministic and cycle-free.
LpResult maximize_over_polytope(const Vector& c, const Matrix& G, const Vector& h);

}  // namespace clqr
