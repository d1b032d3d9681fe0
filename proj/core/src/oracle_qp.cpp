#include "clqr/oracle_qp.hpp"

#include "clqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace clqr {

Trajectory TruncatedQp::trajectory(const Vector& u) const {
  Trajectory traj;
  traj.horizon = horizon;
  const Eigen::Index m = horizon > 0 ? u.size() / static_cast<Eigen::Index>(horizon) : 0;
  for (std::size_t i = 0; i <= horizon; ++i) {
    traj.states.push_back(state_map[i] * x_init + input_map[i] * u);
  }
  for (std::size_t i = 0; i < horizon; ++i) {
    traj.inputs.push_back(u.segment(static_cast<Eigen::Index>(i) * m, m));
  }
  return traj;
}

TruncatedQp build_truncation(const LtiProblem& p, const RiccatiData& ric, std::size_t T,
                             const PolytopeSet* terminal_set) {
  if (T == 0) throw std::invalid_argument("truncation horizon must be at least 1");
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();
  const Eigen::Index Tm = static_cast<Eigen::Index>(T) * m;

  TruncatedQp qp;
  qp.horizon = T;
  qp.x_init = p.x_init;
  qp.stage_rows = p.block_rows();
  qp.state_map.resize(T + 1);
  qp.input_map.resize(T + 1);
  qp.state_map[0] = Matrix::Identity(n, n);
  qp.input_map[0] = Matrix::Zero(n, Tm);
  for (std::size_t i = 0; i < T; ++i) {
    qp.state_map[i + 1] = p.A * qp.state_map[i];
    qp.input_map[i + 1] = p.A * qp.input_map[i];
    qp.input_map[i + 1].middleCols(static_cast<Eigen::Index>(i) * m, m) += p.B;
  }

  qp.H = Matrix::Zero(Tm, Tm);
  qp.h = Vector::Zero(Tm);
  qp.constant = 0.0;
  for (std::size_t i = 0; i <= T; ++i) {
    const Matrix& W = (i == T) ? ric.P : p.Q;
    const Vector free_state = qp.state_map[i] * p.x_init;
    qp.H.noalias() += qp.input_map[i].transpose() * W * qp.input_map[i];
    qp.h.noalias() += qp.input_map[i].transpose() * (W * free_state);
    qp.constant += 0.5 * free_state.dot(W * free_state);
  }
  for (std::size_t i = 0; i < T; ++i) {
    qp.H.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(i) * m, m, m) += p.R;
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose());

  const Eigen::Index stage_rows = p.block_rows();
  qp.terminal_rows = terminal_set ? terminal_set->G.rows() : 0;
  const Eigen::Index rows = static_cast<Eigen::Index>(T) * stage_rows + qp.terminal_rows;
  qp.C = Matrix::Zero(rows, Tm);
  qp.c = Vector::Zero(rows);
  double wi = 1.0;
  for (std::size_t i = 0; i < T; ++i) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(i) * stage_rows;
    qp.C.block(r0, static_cast<Eigen::Index>(i) * m, p.pu(), m) = wi * p.Cu;
    qp.c.segment(r0, p.pu()) = wi * p.cu;
    qp.C.block(r0 + p.pu(), 0, p.px(), Tm) = wi * (p.Cx * qp.input_map[i + 1]);
    qp.c.segment(r0 + p.pu(), p.px()) =
        wi * (p.cx - p.Cx * (qp.state_map[i + 1] * p.x_init));
    wi *= p.w;
  }
  if (terminal_set) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(T) * stage_rows;
    qp.C.block(r0, 0, qp.terminal_rows, Tm) = terminal_set->G * qp.input_map[T];
    qp.c.segment(r0, qp.terminal_rows) =
        terminal_set->g - terminal_set->G * (qp.state_map[T] * p.x_init);
  }
  return qp;
}

namespace {

Matrix inverse_spd(const Matrix& H) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("QP Hessian is not positive definite");
  }
  return llt.solve(Matrix::Identity(H.rows(), H.cols()));
}

double scale_of(const Vector& v) { return std::max(1.0, v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0); }

}  // namespace

QpSolution dual_active_set_qp(const Matrix& H, const Vector& h, const Matrix& C, const Vector& c,
                              std::size_t max_iter) {
  const Matrix Ginv = inverse_spd(H);
  const Eigen::Index nc = C.rows();
  const double feas_tol = 1e-11 * scale_of(c);
  constexpr double eps = 1e-13;

  QpSolution sol;
  Vector u = -Ginv * h;
  std::vector<Eigen::Index> active;
  Vector lam(0);

  auto is_active = [&](Eigen::Index j) {
    return std::find(active.begin(), active.end(), j) != active.end();
  };

  for (std::size_t it = 0;; ++it) {
    if (it > max_iter) {
      throw ClqrError(ErrorKind::NotConverged, "dual active-set QP exceeded its iteration budget");
    }
    // Step 1: most violated inactive constraint.
    Eigen::Index p = -1;
    double worst = -feas_tol;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (is_active(j)) continue;
      const double s = c(j) - C.row(j).dot(u);
      if (s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p < 0) break;

    // Step 2: move along the dual direction until p becomes active.
    const Vector np = -C.row(p).transpose();
    Vector lam_plus(lam.size() + 1);
    lam_plus << lam, 0.0;
    for (;;) {
      const auto na = static_cast<Eigen::Index>(active.size());
      Vector z;
      Vector r(na);
      if (na > 0) {
        Matrix N(C.cols(), na);
        for (Eigen::Index j = 0; j < na; ++j) N.col(j) = -C.row(active[static_cast<std::size_t>(j)]).transpose();
        const Matrix GN = Ginv * N;
        const Matrix S = N.transpose() * GN;
        r = S.fullPivLu().solve(GN.transpose() * np);
        z = Ginv * np - GN * r;
      } else {
        z = Ginv * np;
      }

      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < na; ++j) {
        if (r(j) > eps) {
          const double ratio = lam_plus(j) / r(j);
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      const double curvature = z.dot(np);
      double t2 = std::numeric_limits<double>::infinity();
      if (curvature > eps * std::max(1.0, np.squaredNorm())) {
        const double slack = c(p) - C.row(p).dot(u);
        t2 = -slack / curvature;
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        sol.status = QpStatus::Infeasible;
        sol.u = u;
        sol.multipliers = Vector::Zero(nc);
        sol.iterations = it;
        return sol;
      }

      if (std::isfinite(t2)) u += t * z;
      lam_plus.head(na) -= t * r;
      lam_plus(na) += t;

      if (std::isfinite(t2) && t2 <= t1) {
        active.push_back(p);
        lam = lam_plus;
        break;
      }
      // Partial step: release the blocking constraint and retry.
      active.erase(active.begin() + drop);
      Vector reduced(lam_plus.size() - 1);
      reduced << lam_plus.head(drop), lam_plus.tail(lam_plus.size() - 1 - drop);
      lam_plus = std::move(reduced);
    }
    sol.iterations = it + 1;
  }

  sol.u = u;
  sol.multipliers = Vector::Zero(nc);
  for (std::size_t j = 0; j < active.size(); ++j) {
    sol.multipliers(active[j]) = std::max(0.0, lam(static_cast<Eigen::Index>(j)));
  }
  sol.objective = 0.5 * u.dot(H * u) + h.dot(u);
  return sol;
}

QpSolution dual_projected_gradient_qp(const Matrix& H, const Vector& h, const Matrix& C,
                                      const Vector& c, double tol, std::size_t max_iter) {
  const Matrix Ginv = inverse_spd(H);
  const Eigen::Index nc = C.rows();
  QpSolution sol;
  if (nc == 0) {
    sol.u = -Ginv * h;
    sol.multipliers = Vector(0);
    sol.objective = 0.5 * sol.u.dot(H * sol.u) + h.dot(sol.u);
    return sol;
  }

  const Matrix M = C * Ginv * C.transpose();
  const Vector q = C * (Ginv * h) + c;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const double Lm = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  const double stop = tol * scale_of(q);

  auto residual = [&](const Vector& mu) {
    const Vector g = M * mu + q;
    return (mu - (mu - g).cwiseMax(0.0)).cwiseAbs().maxCoeff();
  };

  // Equality-constrained finish on the current positive set.
  auto try_finish = [&](const Vector& mu, Vector& out) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (mu(j) > 0.0) idx.push_back(j);
    }
    Vector cand = Vector::Zero(nc);
    if (!idx.empty()) {
      const auto k = static_cast<Eigen::Index>(idx.size());
      Matrix Maa(k, k);
      Vector qa(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        qa(a) = q(idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < k; ++b) {
          Maa(a, b) = M(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
      }
      Eigen::FullPivLU<Matrix> lu(Maa);
      if (lu.rank() < k) return false;
      const Vector sub = lu.solve(-qa);
      if (sub.minCoeff() < 0.0) return false;
      for (Eigen::Index a = 0; a < k; ++a) cand(idx[static_cast<std::size_t>(a)]) = sub(a);
    }
    if (residual(cand) > stop) return false;
    out = cand;
    return true;
  };

  Vector mu = Vector::Zero(nc);
  Vector y = mu;
  double t = 1.0;
  bool done = false;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const Vector g = M * y + q;
    const Vector mu_next = (y - g / Lm).cwiseMax(0.0);
    if ((y - mu_next).dot(mu_next - mu) > 0.0) {
      // Momentum points uphill: restart.
      t = 1.0;
      y = mu_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = mu_next + ((t - 1.0) / t_next) * (mu_next - mu);
      t = t_next;
    }
    mu = mu_next;
    if (it % 10 == 0 && residual(mu) <= stop) {
      done = true;
      break;
    }
    if (it % 100 == 99) {
      Vector exact;
      if (try_finish(mu, exact)) {
        mu = exact;
        done = true;
        break;
      }
    }
  }
  if (!done && residual(mu) > stop) {
    throw ClqrError(ErrorKind::NotConverged, "dual projected gradient did not reach tolerance");
  }
  sol.iterations = it + 1;
  sol.multipliers = mu;
  sol.u = -Ginv * (h + C.transpose() * mu);
  sol.objective = 0.5 * sol.u.dot(H * sol.u) + h.dot(sol.u);
  return sol;
}

QpSolution enumerate_active_sets(const Matrix& H, const Vector& h, const Matrix& C,
                                 const Vector& c) {
  const Eigen::Index nc = C.rows();
  if (nc > kEnumerationMaxRows) {
    throw std::invalid_argument("active-set enumeration is limited to 12 rows");
  }
  const Matrix Ginv = inverse_spd(H);
  const Vector u_free = -Ginv * h;
  const double feas_tol = 1e-9 * scale_of(c);

  QpSolution best;
  best.status = QpStatus::Infeasible;
  best.objective = std::numeric_limits<double>::infinity();
  const unsigned long subsets = 1UL << nc;
  for (unsigned long mask = 0; mask < subsets; ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (mask & (1UL << j)) idx.push_back(j);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Vector u = u_free;
    Vector mu = Vector::Zero(nc);
    if (k > 0) {
      Matrix Ca(k, C.cols());
      Vector ca(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        Ca.row(a) = C.row(idx[static_cast<std::size_t>(a)]);
        ca(a) = c(idx[static_cast<std::size_t>(a)]);
      }
      // H u + h + Ca' mu_a = 0, Ca u = ca.
      const Matrix S = Ca * Ginv * Ca.transpose();
      Eigen::FullPivLU<Matrix> lu(S);
      if (lu.rank() < k) continue;
      const Vector mua = lu.solve(Ca * u_free - ca);
      if (mua.minCoeff() < -1e-10) continue;
      u = u_free - Ginv * (Ca.transpose() * mua);
      for (Eigen::Index a = 0; a < k; ++a) mu(idx[static_cast<std::size_t>(a)]) = std::max(0.0, mua(a));
    }
    if ((C * u - c).maxCoeff() > feas_tol) continue;
    const double obj = 0.5 * u.dot(H * u) + h.dot(u);
    if (obj < best.objective) {
      best.status = QpStatus::Optimal;
      best.u = u;
      best.multipliers = mu;
      best.objective = obj;
    }
    ++best.iterations;
  }
  if (best.status == QpStatus::Infeasible) {
    best.u = u_free;
    best.multipliers = Vector::Zero(nc);
  }
  return best;
}

OracleSolution oracle_solve(const TruncatedQp& qp, double tol) {
  if (tol > 1e-9) throw std::invalid_argument("oracle tolerance must be at most 1e-9");

  const bool small = qp.C.rows() <= kEnumerationMaxRows;
  const QpSolution reference = small ? enumerate_active_sets(qp.H, qp.h, qp.C, qp.c)
                                     : dual_active_set_qp(qp.H, qp.h, qp.C, qp.c);
  if (reference.status == QpStatus::Infeasible) {
    throw ClqrError(ErrorKind::Infeasible, "truncated QP has no feasible point");
  }
  const QpSolution gradient_path = dual_projected_gradient_qp(qp.H, qp.h, qp.C, qp.c, tol);

  const double obj_gap = std::abs(reference.objective - gradient_path.objective);
  const double u_gap = (reference.u - gradient_path.u).cwiseAbs().maxCoeff();
  if (obj_gap > kOracleAgreementTol * std::max(1.0, std::abs(reference.objective + qp.constant)) ||
      u_gap > kOracleAgreementTol * scale_of(reference.u)) {
    throw ClqrError(ErrorKind::OracleMismatch,
                    "oracle methods disagree: objective gap " + std::to_string(obj_gap) +
                        ", input gap " + std::to_string(u_gap));
  }

  OracleSolution out;
  out.u = reference.u;
  out.trajectory = qp.trajectory(reference.u);
  out.primal = reference.objective + qp.constant;
  out.F_star = -out.primal;
  out.cross_check = small ? "enumeration" : "active-set";
  const Vector& mu = reference.multipliers;
  for (std::size_t i = 0; i < qp.horizon; ++i) {
    out.lambda.blocks.push_back(-mu.segment(static_cast<Eigen::Index>(i) * qp.stage_rows,
                                            qp.stage_rows));
  }
  if (qp.terminal_rows > 0) {
    out.lambda.blocks.push_back(-mu.tail(qp.terminal_rows));
  }
  return out;
}

}  // namespace clqr
