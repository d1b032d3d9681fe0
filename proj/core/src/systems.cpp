#include "clqr/systems.hpp"

#include <cmath>
#include <random>

namespace clqr {

LtiProblem toy_system() {
  Vector x0(2);
  x0 << -3.0, 0.3;
  return toy_system(x0);
}

LtiProblem toy_system(const Vector& x_init) {
  LtiProblem p;
  p.A.resize(2, 2);
  p.A << 1.1, 2.0, 0.0, 0.95;
  p.B.resize(2, 1);
  p.B << 0.0, 0.0787;
  p.Q.resize(2, 2);
  p.Q << 2.0, -2.0, -2.0, 2.0;
  p.R = 2.0 * Matrix::Identity(1, 1);
  p.Cx.resize(4, 2);
  p.Cx << Matrix::Identity(2, 2), -Matrix::Identity(2, 2);
  p.cx = Vector::Constant(4, 10.0);
  p.Cu.resize(2, 1);
  p.Cu << 1.0, -1.0;
  p.cu = Vector::Constant(2, 1.0);
  p.x_init = x_init;
  p.w = 1.0 / (1.1 * 1.1);
  return p;
}

LtiProblem scalar_system(double a, double b, double q, double r, double u_max, double x_max,
                         double x_init) {
  LtiProblem p;
  p.A = Matrix::Constant(1, 1, a);
  p.B = Matrix::Constant(1, 1, b);
  p.Q = Matrix::Constant(1, 1, q);
  p.R = Matrix::Constant(1, 1, r);
  p.Cx.resize(2, 1);
  p.Cx << 1.0, -1.0;
  p.cx = Vector::Constant(2, x_max);
  p.Cu.resize(2, 1);
  p.Cu << 1.0, -1.0;
  p.cu = Vector::Constant(2, u_max);
  p.x_init = Vector::Constant(1, x_init);
  p.w = 1.0;
  return p;
}

LtiProblem quadrotor_standin(std::uint64_t seed, double dt) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  constexpr double gravity = 9.81;
  const double mass = uniform(0.5, 1.5);
  const Vector inertia = (Vector(3) << uniform(0.01, 0.03), uniform(0.01, 0.03),
                          uniform(0.02, 0.05)).finished();

  // States: p (0..2), v (3..5), attitude (6..8), body rates (9..11).
  Matrix Ac = Matrix::Zero(12, 12);
  Matrix Bc = Matrix::Zero(12, 4);
  Ac.block(0, 3, 3, 3) = Matrix::Identity(3, 3);
  Ac(3, 7) = gravity;   // pitch tilts thrust into x
  Ac(4, 6) = -gravity;  // roll tilts thrust into -y
  Ac.block(6, 9, 3, 3) = Matrix::Identity(3, 3);
  Bc(5, 0) = 1.0 / mass;
  for (int k = 0; k < 3; ++k) Bc(9 + k, 1 + k) = 1.0 / inertia(k);

  // Ac is nilpotent (Ac^4 = 0), so the exponential series terminates.
  Matrix A = Matrix::Identity(12, 12);
  Matrix Bd = Matrix::Zero(12, 4);
  Matrix power = Matrix::Identity(12, 12);
  double factorial = 1.0;
  for (int k = 1; k <= 5; ++k) {
    // Bd accumulates Ac^{k-1} dt^k / k! before power advances.
    factorial *= k;
    Bd += power * Bc * (std::pow(dt, k) / factorial);
    power = power * Ac;
    A += power * (std::pow(dt, k) / factorial);
  }

  LtiProblem p;
  p.A = A;
  p.B = Bd;
  Vector q(12);
  for (int k = 0; k < 3; ++k) q(k) = uniform(5.0, 15.0);
  for (int k = 3; k < 6; ++k) q(k) = uniform(0.5, 2.0);
  for (int k = 6; k < 9; ++k) q(k) = uniform(1.0, 5.0);
  for (int k = 9; k < 12; ++k) q(k) = uniform(0.05, 0.2);
  p.Q = q.asDiagonal();
  Vector r(4);
  r(0) = uniform(0.5, 1.5);
  for (int k = 1; k < 4; ++k) r(k) = uniform(50.0, 150.0);
  p.R = r.asDiagonal();

  Vector x_bound(12);
  for (int k = 0; k < 3; ++k) x_bound(k) = uniform(4.0, 6.0);
  for (int k = 3; k < 6; ++k) x_bound(k) = uniform(1.5, 2.5);
  for (int k = 6; k < 9; ++k) x_bound(k) = uniform(0.3, 0.5);
  for (int k = 9; k < 12; ++k) x_bound(k) = uniform(1.5, 2.5);
  Vector u_bound(4);
  u_bound(0) = uniform(0.4, 0.6) * mass * gravity;
  for (int k = 1; k < 4; ++k) u_bound(k) = uniform(0.05, 0.1);

  p.Cx.resize(24, 12);
  p.Cx << Matrix::Identity(12, 12), -Matrix::Identity(12, 12);
  p.cx.resize(24);
  p.cx << x_bound, x_bound;
  p.Cu.resize(8, 4);
  p.Cu << Matrix::Identity(4, 4), -Matrix::Identity(4, 4);
  p.cu.resize(8);
  p.cu << u_bound, u_bound;
  p.x_init = Vector::Zero(12);
  p.w = 1.0;
  return p;
}

}  // namespace clqr
