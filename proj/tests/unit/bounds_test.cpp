#include "clqr/afbs.hpp"
#include "clqr/bounds.hpp"
#include "clqr/errors.hpp"
#include "clqr/systems.hpp"

#include "dense_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

namespace clqr {
namespace {

double gain_at(const Matrix& A, const Matrix& B, const Matrix& C, double theta) {
  using Cmat = Eigen::MatrixXcd;
  const std::complex<double> z = std::polar(1.0, theta);
  const Cmat M = z * Cmat::Identity(A.rows(), A.cols()) - A.cast<std::complex<double>>();
  const Cmat G = C.cast<std::complex<double>>() * M.fullPivLu().solve(B.cast<std::complex<double>>());
  return Eigen::JacobiSVD<Cmat>(G).singularValues()(0);
}

TEST(HinfNorm, ScalarAnalyticMaximum) {
  const Matrix a = Matrix::Constant(1, 1, 0.5), one = Matrix::Ones(1, 1);
  EXPECT_NEAR(hinf_norm(a, one, one), 1.0 / (1.0 - 0.5), 1e-9);
  EXPECT_NEAR(hinf_norm(a, one, one), 2.0, 1e-6);
}

TEST(HinfNorm, TrivialCases) {
  const Matrix one = Matrix::Ones(1, 1);
  EXPECT_EQ(hinf_norm(Matrix::Constant(1, 1, 0.5), one, Matrix::Zero(1, 1)), 0.0);
  EXPECT_NEAR(hinf_norm(Matrix::Zero(1, 1), one, one), 1.0, 1e-12);
  EXPECT_THROW(hinf_norm(Matrix::Constant(1, 1, 1.0), one, one), ClqrError);
}

TEST(HinfNorm, DominatesGridAndIsGridConverged) {
  const LtiProblem p = toy_system();
  const Matrix A = p.w * p.A;
  const double value = hinf_norm(A, p.B, p.Cx);
  double grid_max = 0.0;
  for (int k = 0; k < 4096; ++k) {
    grid_max = std::max(grid_max, gain_at(A, p.B, p.Cx, 2.0 * M_PI * k / 4096));
  }
  EXPECT_GE(value, grid_max * (1.0 - 1e-12));
  const double doubled = hinf_norm(A, p.B, p.Cx, 1e-10, 8192);
  EXPECT_LT(std::abs(doubled - value) / value, 1e-6);
}

TEST(HinfNorm, MimoMatchesDenseGrid) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix A(3, 3), B(3, 2), C(2, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A(i, j) = g(rng);
      for (int j = 0; j < 2; ++j) B(i, j) = g(rng);
      for (int j = 0; j < 2; ++j) C(j, i) = g(rng);
    }
    A *= 0.9 / spectral_radius(A);
    double fine = 0.0;
    for (int k = 0; k < 200000; ++k) fine = std::max(fine, gain_at(A, B, C, 2.0 * M_PI * k / 200000));
    EXPECT_NEAR(hinf_norm(A, B, C), fine, 1e-4 * fine) << "trial " << trial;
  }
}

LtiProblem scalar_with(double a, double cx_row, double r) {
  LtiProblem p = scalar_system(a, 1.0, 1.0, r);
  p.Cx = Matrix::Constant(1, 1, cx_row);
  p.cx = Vector::Ones(1);
  p.Cu = Matrix::Ones(1, 1);
  p.cu = Vector::Ones(1);
  p.w = 1.0;
  return p;
}

TEST(LipschitzBound, Examples) {
  EXPECT_NEAR(lipschitz_bound(scalar_with(0.0, 1.0, 2.0)).L_global, 2.0, 1e-5);
  EXPECT_NEAR(lipschitz_bound(scalar_with(0.0, 0.0, 1.0)).L_global, 1.0, 1e-12);
  try {
    lipschitz_bound(scalar_with(1.0, 1.0, 1.0));
    FAIL();
  } catch (const ClqrError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnstableSystem);
  }
  EXPECT_FALSE(try_lipschitz_bound(scalar_with(1.0, 1.0, 1.0)).has_value());
}

TEST(LipschitzBound, ToyComponents) {
  const LtiProblem p = toy_system();
  const LipschitzEstimate est = lipschitz_bound(p);
  EXPECT_DOUBLE_EQ(est.state_scale, p.w);
  EXPECT_DOUBLE_EQ(est.bound_Hinv, 0.5);
  EXPECT_NEAR(est.sigma_Cu, std::sqrt(2.0), 1e-12);
  EXPECT_GT(est.L_global, 0.0);
}

// ||grad(l1) - grad(l2)|| <= L ||l1 - l2|| with the gradient taken far
// beyond the support so the LQ tail contributes.
void check_empirical_lipschitz(const LtiProblem& p, std::uint64_t seed) {
  const RiccatiData ric = solve_dare(p);
  const double L = lipschitz_bound(p).L_global;
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t support = 1 + static_cast<std::size_t>(trial) % 5;
    const DualSequence l1 = testing::random_dual(rng, support, p.block_rows(), 5.0);
    const DualSequence l2 = testing::random_dual(rng, support, p.block_rows(), 5.0);
    Trajectory t1 = solve_affine_lq(p, ric, support, l1);
    Trajectory t2 = solve_affine_lq(p, ric, support, l2);
    const BlockSequence g1 = dual_gradient(t1, p, ric, support + 300);
    const BlockSequence g2 = dual_gradient(t2, p, ric, support + 300);
    BlockSequence dg(g1.size());
    for (std::size_t i = 0; i < g1.size(); ++i) dg[i] = g1[i] - g2[i];
    EXPECT_LE(euclidean_norm(dg), L * euclidean_norm(difference(l1, l2))) << "trial " << trial;
  }
}

TEST(LipschitzBound, UpperBoundsObservedCurvature) {
  check_empirical_lipschitz(toy_system(), 31);
  check_empirical_lipschitz(scalar_system(0.5, 1.0, 1.0, 1.0, 1.0, 10.0, 4.0), 32);
}

}  // namespace
}  // namespace clqr
