#include "clqr/stage_sets.hpp"

#include "clqr/errors.hpp"
#include "clqr/lp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace clqr {

bool PolytopeSet::contains(const Vector& x, double tol) const {
  return G.rows() == 0 || max_violation(x) <= tol;
}

double PolytopeSet::max_violation(const Vector& x) const {
  if (G.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (G * x - g).maxCoeff();
}

PolytopeSet make_polytope(const Matrix& G, const Vector& g) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    if (G.row(i).norm() > 0.0) keep.push_back(i);
  }
  PolytopeSet out;
  out.G.resize(static_cast<Eigen::Index>(keep.size()), G.cols());
  out.g.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const double nrm = G.row(keep[k]).norm();
    out.G.row(static_cast<Eigen::Index>(k)) = G.row(keep[k]) / nrm;
    out.g(static_cast<Eigen::Index>(k)) = g(keep[k]) / nrm;
  }
  return out;
}

PolytopeSet lq_constraint_polytope(const LtiProblem& p, const RiccatiData& ric) {
  Matrix G(p.px() + p.pu(), p.n());
  Vector g(p.px() + p.pu());
  G << p.Cx, p.Cu * ric.K;
  g << p.cx, p.cu;
  return make_polytope(G, g);
}

EllipsoidS compute_S(const RiccatiData& ric, const LtiProblem& p) {
  Matrix P = 0.5 * (ric.P + ric.P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-10) {
    P += 1e-9 * Matrix::Identity(p.n(), p.n());
  }
  const Eigen::LLT<Matrix> llt(P);

  Matrix G(p.px() + p.pu(), p.n());
  Vector b(p.px() + p.pu());
  G << p.Cx, p.Cu * ric.K;
  b << p.cx, p.cu;

  EllipsoidS S;
  S.P = P;
  S.r2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    if (b(i) <= 0.0) {
      std::ostringstream os;
      os << "constraint row " << i << " has offset " << b(i) << " <= 0";
      throw ClqrError(ErrorKind::DegenerateSet, os.str());
    }
    const Vector gi = G.row(i).transpose();
    const double support2 = gi.dot(llt.solve(gi));
    if (support2 <= 0.0) continue;  // zero row (e.g. Cu K = 0) never binds
    S.r2 = std::min(S.r2, b(i) * b(i) / support2);
  }
  if (!std::isfinite(S.r2)) {
    // No binding row: any level works; pick one that keeps the scale sane.
    S.r2 = 1.0;
  }
  return S;
}

std::size_t hitting_time(const RiccatiData& ric, const EllipsoidS& S, const Vector& x_start,
                         std::size_t cap) {
  Vector x = x_start;
  for (std::size_t i = 0; i < cap; ++i) {
    if (S.contains_strictly(x)) return i;
    x = ric.A_cl * x;
  }
  throw ClqrError(ErrorKind::CapExceeded,
                  "trajectory did not enter S within " + std::to_string(cap) + " steps");
}

namespace {

bool strictly_feasible_stage(const LtiProblem& p, const Trajectory& traj, std::size_t i) {
  if (p.pu() > 0 && !((p.Cu * traj.inputs[i] - p.cu).array() < 0.0).all()) return false;
  if (p.px() > 0 && !((p.Cx * traj.states[i + 1] - p.cx).array() < 0.0).all()) return false;
  return true;
}

}  // namespace

std::size_t update_support(std::size_t prev_T, Trajectory& traj, const LtiProblem& p,
                           const RiccatiData& ric, const EllipsoidS& S, std::size_t cap) {
  extend_lq_tail(traj, p.A, p.B, ric.K, prev_T);
  const std::size_t entry = prev_T + hitting_time(ric, S, traj.states[prev_T], cap);
  // Stage T_S itself needs u_{T_S} and x_{T_S + 1}.
  extend_lq_tail(traj, p.A, p.B, ric.K, entry + 1);
  std::size_t T = prev_T;
  for (std::size_t i = entry + 1; i-- > prev_T;) {
    if (!strictly_feasible_stage(p, traj, i)) {
      T = i + 1;
      break;
    }
  }
  return T;
}

PolytopeSet compute_mpi_set(const Matrix& A_cl, const PolytopeSet& constraints,
                            std::size_t max_iter) {
  PolytopeSet current = constraints;
  const Eigen::Index n = A_cl.rows();
  Matrix power = A_cl;  // A_cl^j
  for (std::size_t j = 1; j <= max_iter; ++j) {
    const Matrix candidate = constraints.G * power;
    std::vector<Eigen::Index> added;
    Matrix G_new = current.G;
    Vector g_new = current.g;
    for (Eigen::Index r = 0; r < candidate.rows(); ++r) {
      const Vector row = candidate.row(r).transpose();
      const double bound = constraints.g(r);
      const auto lp = maximize_over_polytope(row, current.G, current.g);
      const bool redundant = lp.status == LpStatus::Optimal &&
                             lp.value <= bound + 1e-10 * std::max(1.0, std::abs(bound));
      if (!redundant && row.norm() > 0.0) {
        G_new.conservativeResize(G_new.rows() + 1, n);
        g_new.conservativeResize(g_new.size() + 1);
        const double nrm = row.norm();
        G_new.row(G_new.rows() - 1) = row.transpose() / nrm;
        g_new(g_new.size() - 1) = bound / nrm;
        added.push_back(r);
      }
    }
    if (added.empty()) return current;
    current.G = std::move(G_new);
    current.g = std::move(g_new);
    power = A_cl * power;
  }
  throw ClqrError(ErrorKind::NotConverged,
                  "MPI iteration did not terminate within " + std::to_string(max_iter) + " steps");
}

}  // namespace clqr
