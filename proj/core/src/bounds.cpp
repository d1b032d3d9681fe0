#include "clqr/bounds.hpp"

#include "clqr/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace clqr {

namespace {

using CMatrix = Eigen::MatrixXcd;

double gain_at(const Matrix& A, const Matrix& B, const Matrix& C, double theta) {
  const auto n = A.rows();
  const std::complex<double> z = std::polar(1.0, theta);
  const CMatrix M = z * CMatrix::Identity(n, n) - A.cast<std::complex<double>>();
  const CMatrix X = M.partialPivLu().solve(B.cast<std::complex<double>>());
  const CMatrix G = C.cast<std::complex<double>>() * X;
  Eigen::JacobiSVD<CMatrix> svd(G);
  return svd.singularValues()(0);
}

}  // namespace

double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C, double tol, int grid_points) {
  if (C.rows() == 0 || B.cols() == 0 || C.isZero(0.0) || B.isZero(0.0)) return 0.0;
  if (spectral_radius(A) >= 1.0) {
    throw ClqrError(ErrorKind::UnstableSystem,
                    "H-infinity norm requested for a system with spectral radius >= 1");
  }

  const double two_pi = 2.0 * std::numbers::pi;
  const double step = two_pi / grid_points;
  double best = -1.0;
  double best_theta = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double theta = k * step;
    const double g = gain_at(A, B, C, theta);
    if (g > best) {
      best = g;
      best_theta = theta;
    }
  }

  // Golden-section search on the bracket around the grid maximum.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_theta - step;
  double hi = best_theta + step;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = gain_at(A, B, C, x1);
  double f2 = gain_at(A, B, C, x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = gain_at(A, B, C, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = gain_at(A, B, C, x1);
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

LipschitzEstimate lipschitz_bound(const LtiProblem& p) {
  LipschitzEstimate est;
  est.state_scale = p.w;
  est.output_scale = 1.0;
  {
    Eigen::JacobiSVD<Matrix> svd(p.Cu);
    est.sigma_Cu = p.Cu.size() > 0 ? svd.singularValues()(0) : 0.0;
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p.R + p.R.transpose()),
                                             Eigen::EigenvaluesOnly);
    est.bound_Hinv = 1.0 / es.eigenvalues().minCoeff();
  }
  const Matrix A_scaled = est.state_scale * p.A;
  est.hinf = hinf_norm(A_scaled, p.B, p.Cx) * (1.0 + kHinfInflation);
  const double c_norm = est.sigma_Cu + est.output_scale * est.hinf;
  est.L_global = est.bound_Hinv * c_norm * c_norm;
  return est;
}

std::optional<LipschitzEstimate> try_lipschitz_bound(const LtiProblem& problem) {
  try {
    return lipschitz_bound(problem);
  } catch (const ClqrError& e) {
    if (e.kind() == ErrorKind::UnstableSystem) return std::nullopt;
    throw;
  }
}

}  // namespace clqr
