#include "clqr/problem.hpp"

#include "clqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace clqr {

namespace {

std::string shape_of(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

void require_shape(const char* name, const Matrix& M, Eigen::Index rows, Eigen::Index cols) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << "field '" << name << "' has shape " << shape_of(M) << ", expected " << rows << "x"
       << cols;
    throw ClqrError(ErrorKind::ParseError, os.str());
  }
}

void require_length(const char* name, const Vector& v, Eigen::Index len) {
  if (v.size() != len) {
    std::ostringstream os;
    os << "field '" << name << "' has length " << v.size() << ", expected " << len;
    throw ClqrError(ErrorKind::ParseError, os.str());
  }
}

// Eigenvalues of the symmetric part; the caller checks symmetry separately.
Vector sym_eigenvalues(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool is_symmetric(const Matrix& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

void LtiProblem::check_shapes() const {
  const Eigen::Index nn = A.rows();
  const Eigen::Index mm = B.cols();
  if (nn == 0) throw ClqrError(ErrorKind::ParseError, "state dimension n must be positive");
  if (mm == 0) throw ClqrError(ErrorKind::ParseError, "input dimension m must be positive");
  require_shape("A", A, nn, nn);
  require_shape("B", B, nn, mm);
  require_shape("Q", Q, nn, nn);
  require_shape("R", R, mm, mm);
  require_shape("Cx", Cx, cx.size(), nn);
  require_shape("Cu", Cu, cu.size(), mm);
  require_length("x_init", x_init, nn);
}

void extend_lq_tail(Trajectory& traj, const Matrix& A, const Matrix& B, const Matrix& K,
                    std::size_t new_horizon) {
  if (traj.states.empty()) {
    throw ClqrError(ErrorKind::ParseError, "cannot extend an empty trajectory");
  }
  while (traj.horizon < new_horizon) {
    const Vector& x = traj.states.back();
    Vector u = K * x;
    Vector next = A * x + B * u;
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(std::move(next));
    ++traj.horizon;
  }
}

double dynamics_residual(const Trajectory& traj, const Matrix& A, const Matrix& B) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.inputs.size(); ++i) {
    const Vector r = traj.states[i + 1] - A * traj.states[i] - B * traj.inputs[i];
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) {
    return c.passed || c.severity == CheckSeverity::Advisory;
  });
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (c.passed) continue;
    os << (c.severity == CheckSeverity::Required ? "FAIL " : "WARN ") << c.name;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "; ";
  }
  return os.str();
}

double spectral_radius(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double default_weight(const Matrix& A) {
  const double rho = spectral_radius(A);
  if (rho <= 1.0) return 1.0;
  return 1.0 / (rho * rho);
}

ValidationReport validate(const LtiProblem& p) {
  ValidationReport report;
  auto add = [&](const char* name, bool ok, std::string detail,
                 CheckSeverity sev = CheckSeverity::Required) {
    report.checks.push_back({name, ok, sev, std::move(detail)});
  };

  try {
    p.check_shapes();
    add(check_names::kShapes, true, "");
  } catch (const ClqrError& e) {
    add(check_names::kShapes, false, e.what());
    return report;
  }

  {
    const Vector ev = sym_eigenvalues(p.Q);
    const bool ok = is_symmetric(p.Q) && ev.minCoeff() >= -1e-10;
    add(check_names::kQ, ok, "min eigenvalue " + std::to_string(ev.minCoeff()));
  }
  {
    const Vector ev = sym_eigenvalues(p.R);
    const bool ok = is_symmetric(p.R) && ev.minCoeff() >= 1e-10;
    add(check_names::kR, ok, "min eigenvalue " + std::to_string(ev.minCoeff()));
  }
  {
    bool ok = p.Cu.rows() >= p.Cu.cols();
    double smin = 0.0;
    if (ok) {
      Eigen::JacobiSVD<Matrix> svd(p.Cu);
      smin = svd.singularValues().minCoeff();
      ok = smin > 1e-10;
    }
    add(check_names::kCu, ok, "smallest singular value " + std::to_string(smin));
  }
  add(check_names::kCx, p.cx.size() == 0 || p.cx.minCoeff() > 0.0, "origin must be interior to X");
  add(check_names::kCuOffset, p.cu.minCoeff() > 0.0, "origin must be interior to U",
      CheckSeverity::Advisory);

  {
    const double rho = spectral_radius(p.A);
    const bool ok = p.w > 0.0 && p.w <= 1.0 && p.w * rho * rho <= 1.0 + 1e-12;
    add(check_names::kWeight, ok,
        "w=" + std::to_string(p.w) + ", w*rho(A)^2=" + std::to_string(p.w * rho * rho),
        CheckSeverity::Advisory);
  }

  {
    // Hautus test on every eigenvalue outside the open unit disc. The small
    // margin keeps defective unit eigenvalues (computed slightly inside the
    // circle) in the test set.
    using CMatrix = Eigen::MatrixXcd;
    Eigen::EigenSolver<Matrix> es(p.A, false);
    const auto n = p.n();
    bool ok = true;
    std::string detail;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const std::complex<double> mu = es.eigenvalues()(k);
      if (std::abs(mu) < 1.0 - 1e-6) continue;
      CMatrix pbh(n, n + p.m());
      pbh.leftCols(n) = p.A.cast<std::complex<double>>() - mu * CMatrix::Identity(n, n);
      pbh.rightCols(p.m()) = p.B.cast<std::complex<double>>();
      Eigen::JacobiSVD<CMatrix> svd(pbh);
      const double scale = std::max(1.0, svd.singularValues()(0));
      if (svd.singularValues()(n - 1) <= 1e-9 * scale) {
        ok = false;
        std::ostringstream os;
        os << "uncontrollable mode " << mu;
        detail = os.str();
        break;
      }
    }
    add(check_names::kStabilizable, ok, detail);
  }
  return report;
}

double weighted_norm(const BlockSequence& seq, double w) {
  return std::sqrt(weighted_dot(seq, seq, w));
}

double weighted_dot(const BlockSequence& z, const BlockSequence& y, double w) {
  const std::size_t common = std::min(z.size(), y.size());
  double acc = 0.0;
  double wi = 1.0;
  for (std::size_t i = 0; i < common; ++i) {
    acc += wi * z[i].dot(y[i]);
    wi *= w;
  }
  return acc;
}

double euclidean_norm(const BlockSequence& seq) {
  double acc = 0.0;
  for (const auto& b : seq) acc += b.squaredNorm();
  return std::sqrt(acc);
}

}  // namespace clqr
