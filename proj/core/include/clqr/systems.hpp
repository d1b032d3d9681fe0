#pragma once

#include "clqr/problem.hpp"

#include <cstdint>

namespace clqr {

/// Unstable two-state, one-input benchmark: A = [1.1 2; 0 0.95],
/// B = [0; 0.0787], Q = [2 -2; -2 2], R = 2, ||x||_inf <= 10,
/// |u| <= 1, w = 1/1.1^2.
LtiProblem toy_system();
LtiProblem toy_system(const Vector& x_init);

/// Scalar plant x+ = a x + b u with |u| <= u_max and |x| <= x_max, w = 1.
LtiProblem scalar_system(double a = 0.5, double b = 1.0, double q = 1.0, double r = 1.0,
                         double u_max = 1.0, double x_max = 10.0, double x_init = 0.0);

/// Twelve-state, four-input hover linearization of a quadrotor-like
/// vehicle (position, velocity, attitude, body rates; thrust and three
/// torques), discretized exactly with step `dt`. The continuous-time state
/// matrix is nilpotent, so every eigenvalue of A equals 1 and w = 1. Mass,
/// inertias, cost weights and constraint bounds are drawn from `seed`.
LtiProblem quadrotor_standin(std::uint64_t seed = 7, double dt = 0.1);

}  // namespace clqr
