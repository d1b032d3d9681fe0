#include "clqr/riccati.hpp"

#include "clqr/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clqr {

namespace {

constexpr std::size_t kMaxSweeps = 100000;
constexpr double kTargetResidual = 1e-12;
constexpr double kAcceptResidual = 1e-9;
constexpr std::size_t kStallWindow = 2000;

double induced_inf_norm(const Matrix& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

Matrix riccati_map(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                   const Matrix& P) {
  const Matrix PA = P * A;
  const Matrix BtPA = B.transpose() * PA;
  const Matrix M = R + B.transpose() * P * B;
  Matrix next = Q + A.transpose() * PA - BtPA.transpose() * M.llt().solve(BtPA);
  return 0.5 * (next + next.transpose());
}

}  // namespace

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
  const Matrix PA = P * A;
  const Matrix BtPA = B.transpose() * PA;
  const Matrix M = R + B.transpose() * P * B;
  const Matrix res = A.transpose() * PA - P - BtPA.transpose() * M.ldlt().solve(BtPA) + Q;
  return induced_inf_norm(res);
}

RiccatiData solve_dare(const LtiProblem& p) {
  Matrix P = 0.5 * (p.Q + p.Q.transpose());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_at = 0;
  std::size_t sweep = 0;
  double residual = dare_residual(p.A, p.B, p.Q, p.R, P);
  while (residual > kTargetResidual && sweep < kMaxSweeps) {
    P = riccati_map(p.A, p.B, p.Q, p.R, P);
    ++sweep;
    residual = dare_residual(p.A, p.B, p.Q, p.R, P);
    if (!std::isfinite(residual)) break;
    if (residual < best) {
      best = residual;
      best_at = sweep;
    } else if (sweep - best_at > kStallWindow) {
      break;
    }
  }
  if (!(residual <= kAcceptResidual)) {
    std::ostringstream os;
    os << "Riccati iteration stopped after " << sweep << " sweeps with residual " << residual;
    throw ClqrError(ErrorKind::NonConvergence, os.str());
  }

  RiccatiData out;
  out.P = P;
  const Matrix M = p.R + p.B.transpose() * P * p.B;
  out.stage_hessian_inv = M.llt().solve(Matrix::Identity(p.m(), p.m()));
  out.K = -out.stage_hessian_inv * p.B.transpose() * P * p.A;
  out.A_cl = p.A + p.B * out.K;
  out.residual = residual;
  out.sweeps = sweep;
  if (spectral_radius(out.A_cl) >= 1.0) {
    throw ClqrError(ErrorKind::NonConvergence,
                    "Riccati solution is not stabilizing (undetectable mode?)");
  }
  return out;
}

Trajectory solve_lq_with_terms(const LtiProblem& p, const RiccatiData& ric, std::size_t T,
                               const LinearTerms& terms) {
  const auto n = p.n();
  const auto m = p.m();
  const Matrix& P = ric.P;
  if (!ric.stage_hessian_inv.allFinite()) {
    throw ClqrError(ErrorKind::SingularStageHessian, "R + B'PB is singular");
  }

  // Value function V_i(x) = 1/2 x'P x + p_i'x + const; feedforward k_i.
  std::vector<Vector> ff(T, Vector::Zero(m));
  Vector lin = Vector::Zero(n);
  if (T > 0 && T - 1 < terms.state.size()) lin = terms.state[T - 1];
  for (std::size_t idx = T; idx-- > 0;) {
    Vector rhs = p.B.transpose() * lin;
    if (idx < terms.input.size()) rhs += terms.input[idx];
    ff[idx] = -ric.stage_hessian_inv * rhs;
    Vector next = p.A.transpose() * (lin + P * (p.B * ff[idx]));
    if (idx >= 1 && idx - 1 < terms.state.size()) next += terms.state[idx - 1];
    lin = std::move(next);
  }

  Trajectory traj;
  traj.horizon = T;
  traj.states.reserve(T + 1);
  traj.inputs.reserve(T);
  traj.states.push_back(p.x_init);
  for (std::size_t i = 0; i < T; ++i) {
    const Vector& x = traj.states.back();
    Vector u = ric.K * x + ff[i];
    Vector next = p.A * x + p.B * u;
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory solve_affine_lq(const LtiProblem& p, const RiccatiData& ric, std::size_t T,
                           const DualSequence& lambda) {
  if (lambda.support() > T) {
    throw std::invalid_argument("multiplier support exceeds the LQ horizon");
  }
  const auto pu = p.pu();
  const auto px = p.px();
  LinearTerms terms;
  terms.input.reserve(lambda.support());
  terms.state.reserve(lambda.support());
  double wi = 1.0;
  for (const auto& blk : lambda.blocks) {
    terms.input.push_back(-wi * (p.Cu.transpose() * blk.head(pu)));
    terms.state.push_back(-wi * (p.Cx.transpose() * blk.segment(pu, px)));
    wi *= p.w;
  }
  return solve_lq_with_terms(p, ric, T, terms);
}

double lq_cost(const LtiProblem& p, const RiccatiData& ric, const Trajectory& traj) {
  double acc = 0.0;
  for (std::size_t i = 0; i < traj.horizon; ++i) {
    acc += traj.states[i].dot(p.Q * traj.states[i]) + traj.inputs[i].dot(p.R * traj.inputs[i]);
  }
  const Vector& xT = traj.states[traj.horizon];
  acc += xT.dot(ric.P * xT);
  return 0.5 * acc;
}

}  // namespace clqr
