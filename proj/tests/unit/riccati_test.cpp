#include "clqr/errors.hpp"
#include "clqr/riccati.hpp"
#include "clqr/systems.hpp"

#include "dense_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

namespace clqr {
namespace {

// Plain fixed-point iteration of the scalar Riccati map.
double scalar_riccati_fixed_point(double a, double b, double q, double r) {
  double P = q;
  for (int i = 0; i < 10000; ++i) P = q + a * a * P - (a * P * b) * (a * P * b) / (r + b * b * P);
  return P;
}

TEST(Dare, ZeroDynamicsCollapsesToStateCost) {
  const RiccatiData ric = solve_dare(scalar_system(0.0, 1.0, 1.0, 1.0));
  EXPECT_NEAR(ric.P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(ric.K(0, 0), 0.0, 1e-12);
}

TEST(Dare, ScalarMatchesQuadraticRootAndFixedPoint) {
  const RiccatiData ric = solve_dare(scalar_system(0.5, 1.0, 1.0, 1.0));
  const double root = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;
  EXPECT_NEAR(root, scalar_riccati_fixed_point(0.5, 1.0, 1.0, 1.0), 1e-12);
  EXPECT_NEAR(ric.P(0, 0), root, 1e-10);
  EXPECT_NEAR(ric.P(0, 0), 1.1328, 1e-4);
  EXPECT_NEAR(ric.K(0, 0), -0.5 * root / (1.0 + root), 1e-10);
  EXPECT_NEAR(ric.K(0, 0), -0.2656, 1e-4);
  EXPECT_NEAR(ric.A_cl(0, 0), 0.5 + ric.K(0, 0), 1e-14);
}

TEST(Dare, ToySystemResidualAndStability) {
  const LtiProblem p = toy_system();
  const RiccatiData ric = solve_dare(p);
  EXPECT_LE(dare_residual(p.A, p.B, p.Q, p.R, ric.P), 1e-9);
  EXPECT_LE(ric.residual, 1e-9);
  EXPECT_LT(spectral_radius(ric.A_cl), 1.0);
  EXPECT_LT((ric.P - ric.P.transpose()).norm(), 1e-9);
}

TEST(Dare, UnstabilizablePlantThrows) {
  LtiProblem p = toy_system();
  p.A = Matrix::Identity(2, 2) * 1.2;
  p.B = Matrix(2, 1);
  p.B << 1.0, 0.0;
  p.Q = Matrix::Identity(2, 2);
  try {
    solve_dare(p);
    FAIL();
  } catch (const ClqrError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
  }
}

TEST(AffineLq, ZeroMultipliersGiveLqTrajectory) {
  const LtiProblem p = toy_system();
  const RiccatiData ric = solve_dare(p);
  const Trajectory traj = solve_affine_lq(p, ric, 6, DualSequence{});
  Vector x = p.x_init;
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_LT((traj.inputs[i] - ric.K * x).norm(), 1e-10);
    x = ric.A_cl * x;
    EXPECT_LT((traj.states[i + 1] - x).norm(), 1e-10);
  }
  EXPECT_NEAR(lq_cost(p, ric, traj), 0.5 * p.x_init.dot(ric.P * p.x_init), 1e-9);
}

TEST(AffineLq, OriginStaysAtOrigin) {
  const LtiProblem p = toy_system(Vector::Zero(2));
  const RiccatiData ric = solve_dare(p);
  const Trajectory traj = solve_affine_lq(p, ric, 4, DualSequence{});
  for (const auto& x : traj.states) EXPECT_EQ(x.norm(), 0.0);
  for (const auto& u : traj.inputs) EXPECT_EQ(u.norm(), 0.0);
}

TEST(AffineLq, ScalarMatchesDenseKkt) {
  const LtiProblem p = scalar_system(0.5, 1.0, 1.0, 1.0, 1.0, 10.0, 3.0);
  const RiccatiData ric = solve_dare(p);
  std::mt19937_64 rng(21);
  const DualSequence lambda = testing::random_dual(rng, 2, p.block_rows());
  const Trajectory fast = solve_affine_lq(p, ric, 2, lambda);
  const auto dense = testing::dense_lagrangian_minimizer(p, ric.P, 2, lambda);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(fast.inputs[i](0), dense.traj.inputs[i](0), 1e-10);
    EXPECT_NEAR(fast.states[i + 1](0), dense.traj.states[i + 1](0), 1e-10);
  }
}

// Random plants with T (n + m) <= 60, several weights and supports.
TEST(AffineLq, RecursionMatchesDenseKktOnRandomInstances) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const int m = 1 + trial % 2;
    LtiProblem p;
    p.A = Matrix(n, n);
    p.B = Matrix(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) p.A(i, j) = 0.6 * g(rng);
      for (int j = 0; j < m; ++j) p.B(i, j) = g(rng);
    }
    Matrix L = Matrix::Random(n, n);
    p.Q = L * L.transpose();
    p.R = Matrix::Identity(m, m) * (0.5 + trial % 3);
    p.Cx = Matrix(2 * n, n);
    p.Cx << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    p.cx = Vector::Constant(2 * n, 5.0);
    p.Cu = Matrix(2 * m, m);
    p.Cu << Matrix::Identity(m, m), -Matrix::Identity(m, m);
    p.cu = Vector::Constant(2 * m, 1.0);
    p.x_init = Vector(n);
    for (int i = 0; i < n; ++i) p.x_init(i) = 2.0 * g(rng);
    p.w = std::min(1.0, default_weight(p.A) * (trial % 2 ? 1.0 : 0.9));
    RiccatiData ric;
    try {
      ric = solve_dare(p);
    } catch (const ClqrError&) {
      continue;  // unstabilizable draw
    }
    const std::size_t T = static_cast<std::size_t>(std::max(1, 60 / (n + m)));
    const std::size_t support = 1 + static_cast<std::size_t>(trial) % T;
    const DualSequence lambda = testing::random_dual(rng, support, p.block_rows(), 2.0);
    const Trajectory fast = solve_affine_lq(p, ric, T, lambda);
    const auto dense = testing::dense_lagrangian_minimizer(p, ric.P, T, lambda);
    double err = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      err = std::max(err, (fast.inputs[i] - dense.traj.inputs[i]).cwiseAbs().maxCoeff());
      err = std::max(err, (fast.states[i + 1] - dense.traj.states[i + 1]).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(err, 1e-8) << "trial " << trial;
    ++checked;
  }
  EXPECT_GE(checked, 30);
}

// The returned inputs zero the gradient of the Lagrangian as a function of
// the inputs alone (states eliminated by the dynamics).
TEST(AffineLq, StationarityByFiniteDifferences) {
  const LtiProblem p = toy_system();
  const RiccatiData ric = solve_dare(p);
  std::mt19937_64 rng(9);
  const std::size_t T = 5;
  const DualSequence lambda = testing::random_dual(rng, 4, p.block_rows());
  const Trajectory traj = solve_affine_lq(p, ric, T, lambda);

  const std::function<double(const std::vector<Vector>&)> lagrangian =
      [&](const std::vector<Vector>& u) {
        Vector x = p.x_init;
        double val = 0.0;
        for (std::size_t i = 0; i < T; ++i) {
          val += 0.5 * (x.dot(p.Q * x) + u[i].dot(p.R * u[i]));
          const Vector xn = p.A * x + p.B * u[i];
          if (i < lambda.support()) {
            const double wi = std::pow(p.w, static_cast<double>(i));
            val -= wi * lambda.blocks[i].head(p.pu()).dot(p.Cu * u[i] - p.cu);
            val -= wi * lambda.blocks[i].tail(p.px()).dot(p.Cx * xn - p.cx);
          }
          x = xn;
        }
        return val + 0.5 * x.dot(ric.P * x);
      };
  const double h = 1e-4;
  for (std::size_t i = 0; i < T; ++i) {
    std::vector<Vector> up = traj.inputs, dn = traj.inputs;
    up[i](0) += h;
    dn[i](0) -= h;
    EXPECT_LE(std::abs(lagrangian(up) - lagrangian(dn)) / (2 * h), 1e-8) << "stage " << i;
  }
}

}  // namespace
}  // namespace clqr
