#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace clqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sequence of finitely many blocks z_0, z_1, ...; all later blocks are zero.
using BlockSequence = std::vector<Vector>;

/// Infinite-horizon constrained LQR instance
///
///   minimize   1/2 sum_i x_i' Q x_i + u_i' R u_i
///   subject to x_{i+1} = A x_i + B u_i,  x_0 = x_init,
///              Cx x_{i+1} <= cx,  Cu u_i <= cu   for all i >= 0,
///
/// together with the weight w of the l2_w sequence spaces used by the dual.
struct LtiProblem {
  Matrix A, B, Q, R;
  Matrix Cx, Cu;
  Vector cx, cu;
  Vector x_init;
  double w = 1.0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index px() const { return Cx.rows(); }
  Eigen::Index pu() const { return Cu.rows(); }
  /// Rows of one dual block: input rows first, then state rows.
  Eigen::Index block_rows() const { return pu() + px(); }

  /// Throws ParseError when matrix/vector shapes are inconsistent.
  void check_shapes() const;
};

/// State/input sequence up to `horizon`; beyond it the LQ law applies.
struct Trajectory {
  std::size_t horizon = 0;
  std::vector<Vector> states;  ///< x_0 .. x_horizon
  std::vector<Vector> inputs;  ///< u_0 .. u_{horizon-1}
};

/// Appends LQ-tail steps x_{i+1} = (A + B K) x_i, u_i = K x_i until the
/// stored horizon reaches `new_horizon`. No-op if already long enough.
void extend_lq_tail(Trajectory& traj, const Matrix& A, const Matrix& B, const Matrix& K,
                    std::size_t new_horizon);

/// max_i ||x_{i+1} - A x_i - B u_i||_inf over the stored indices.
double dynamics_residual(const Trajectory& traj, const Matrix& A, const Matrix& B);

enum class CheckSeverity { Required, Advisory };

struct ValidationCheck {
  std::string name;
  bool passed = false;
  CheckSeverity severity = CheckSeverity::Required;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  /// All required checks pass (advisory ones may fail).
  bool ok() const;
  /// Every check passes, including the weight bound.
  bool all_passed() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string summary() const;
};

/// Check names used in ValidationReport.
namespace check_names {
inline constexpr const char* kShapes = "shapes";
inline constexpr const char* kQ = "Q symmetric PSD";
inline constexpr const char* kR = "R symmetric PD";
inline constexpr const char* kCu = "C_u full column rank";
inline constexpr const char* kCx = "c_x positive";
inline constexpr const char* kCuOffset = "c_u positive";
inline constexpr const char* kWeight = "weight bound";
inline constexpr const char* kStabilizable = "stabilizable";
}  // namespace check_names

/// Checks the standing assumptions; never throws. The weight bound
/// w * rho(A)^2 <= 1 is advisory: the unweighted (w = 1) variant of an
/// unstable plant is a legitimate experiment, it merely loses the
/// convergence guarantee.
ValidationReport validate(const LtiProblem& problem);

double spectral_radius(const Matrix& A);

/// min{1, 1 / rho(A)^2}.
double default_weight(const Matrix& A);

/// sqrt(sum_i w^i ||z_i||^2). Blocks may have different sizes.
double weighted_norm(const BlockSequence& seq, double w);

/// <z, y>_w over the common support; missing blocks are zero.
double weighted_dot(const BlockSequence& z, const BlockSequence& y, double w);

/// Plain Euclidean norm over all coordinates of all blocks.
double euclidean_norm(const BlockSequence& seq);

}  // namespace clqr
