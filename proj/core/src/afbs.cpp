#include "clqr/afbs.hpp"

#include "clqr/errors.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace clqr {

void SolverOptions::check() const {
  if (!(a > 2.0)) throw std::invalid_argument("momentum parameter a must exceed 2");
  if (!(eta > 1.0)) throw std::invalid_argument("backtracking factor eta must exceed 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(L0 > 0.0)) throw std::invalid_argument("initial curvature L0 must be positive");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be at least 1");
  if (fixed_L && !(*fixed_L > 0.0)) throw std::invalid_argument("fixed L must be positive");
}

void SolveLog::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(12);
  out << "k,alpha,L,T,F_dual,residual,bt_trials\n";
  for (const auto& r : records) {
    out << r.k << ',' << r.alpha << ',' << r.L << ',' << r.T << ',' << r.dual_objective << ','
        << r.residual << ',' << r.bt_trials << '\n';
  }
  out.precision(old_precision);
}

double momentum(std::size_t k, double a) {
  if (k <= 1) return 0.0;
  return static_cast<double>(k - 1) / (static_cast<double>(k) + a);
}

BlockSequence dual_gradient(Trajectory& traj, const LtiProblem& p, const RiccatiData& ric,
                            std::size_t support) {
  extend_lq_tail(traj, p.A, p.B, ric.K, support);
  const auto pu = p.pu();
  const auto px = p.px();
  BlockSequence g(support);
  double wi = 1.0;
  for (std::size_t i = 0; i < support; ++i) {
    Vector blk(pu + px);
    blk.head(pu) = p.Cu * traj.inputs[i] - p.cu;
    blk.tail(px) = p.Cx * traj.states[i + 1] - p.cx;
    g[i] = wi * blk;
    wi *= p.w;
  }
  return g;
}

namespace {

double block_dot(const BlockSequence& a, const BlockSequence& b) {
  double acc = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc += a[i].dot(b[i]);
  return acc;
}

double block_sqnorm(const BlockSequence& a) {
  double acc = 0.0;
  for (const auto& blk : a) acc += blk.squaredNorm();
  return acc;
}

}  // namespace

double dual_value(const DualModel& model, const DualSequence& lambda, Trajectory& traj) {
  const BlockSequence g = model.gradient(traj, lambda.support());
  return block_dot(lambda.blocks, g) - model.primal_cost(traj);
}

Trajectory ClqrDualModel::minimize_lagrangian(const DualSequence& lambda,
                                              std::size_t horizon) const {
  return solve_affine_lq(problem_, riccati_, horizon, lambda);
}

std::size_t ClqrDualModel::next_support(std::size_t prev, Trajectory& traj) const {
  return update_support(prev, traj, problem_, riccati_, S_, cap_);
}

BlockSequence ClqrDualModel::gradient(Trajectory& traj, std::size_t support) const {
  return dual_gradient(traj, problem_, riccati_, support);
}

double ClqrDualModel::primal_cost(const Trajectory& traj) const {
  return lq_cost(problem_, riccati_, traj);
}

BacktrackOutcome backtrack_step(const DualModel& model, const DualSequence& y, double value_y,
                                const BlockSequence& grad_y, std::size_t support, double L_prev,
                                double eta) {
  if (!(L_prev > 0.0) || !(eta > 1.0)) {
    throw std::invalid_argument("backtracking needs L_prev > 0 and eta > 1");
  }
  // Rounding slack so that a step of length zero is always accepted.
  const double slack = 1e-12 * (1.0 + std::abs(value_y));
  BacktrackOutcome out;
  double L = L_prev;
  for (;;) {
    ++out.trials;
    DualSequence p = projected_step(y, grad_y, 1.0 / L, support, model.block_rows());
    Trajectory traj = model.minimize_lagrangian(p, support);
    const double value = dual_value(model, p, traj);
    const BlockSequence d = difference(p, y);
    const double model_value = value_y + block_dot(d, grad_y) + 0.5 * L * block_sqnorm(d);
    if (value <= model_value + slack) {
      out.L = L;
      out.lambda = std::move(p);
      out.primal = std::move(traj);
      out.value = value;
      return out;
    }
    L *= eta;
    if (L > 1e16) {
      throw ClqrError(ErrorKind::CurvatureOverflow, "backtracking curvature exceeded 1e16");
    }
  }
}

SolveResult run_afbs(const DualModel& model, const SolverOptions& options,
                     const DualSequence& start, std::size_t start_support,
                     std::optional<double> fixed_L) {
  options.check();
  const bool fixed = options.stepsize_mode == StepsizeMode::Fixed;
  if (fixed && !fixed_L) {
    throw std::invalid_argument("fixed stepsize mode requires a curvature bound");
  }
  const double w = model.weight();

  DualSequence lam = start;
  DualSequence lam_prev = start;
  std::size_t T = std::max(start_support, start.support());
  double L = fixed ? *fixed_L : options.L0;

  SolveResult res;
  res.log.status = SolveStatus::MaxIterExceeded;
  Trajectory last_primal;
  double last_value = 0.0;

  for (std::size_t k = 0; k < options.max_iter; ++k) {
    const double alpha = momentum(k, options.a);
    const DualSequence y = extrapolate(lam, lam_prev, alpha);

    Trajectory ty = model.minimize_lagrangian(y, T);
    const std::size_t T_next = model.next_support(T, ty);
    const BlockSequence grad = model.gradient(ty, T_next);
    const double value_y = block_dot(y.blocks, grad) - model.primal_cost(ty);

    DualSequence next;
    std::size_t trials = 1;
    if (fixed) {
      next = projected_step(y, grad, 1.0 / L, T_next, model.block_rows());
      last_primal = model.minimize_lagrangian(next, T_next);
      last_value = dual_value(model, next, last_primal);
    } else {
      BacktrackOutcome bt = backtrack_step(model, y, value_y, grad, T_next, L, options.eta);
      L = bt.L;
      trials = bt.trials;
      next = std::move(bt.lambda);
      last_primal = std::move(bt.primal);
      last_value = bt.value;
    }

    const double residual = weighted_norm(difference(next, y), w);
    res.log.records.push_back({k, alpha, L, T_next, last_value, residual, trials});
    if (options.observer) {
      options.observer(IterateView{k + 1, next, last_primal, last_value, L});
    }

    lam_prev = std::move(lam);
    lam = std::move(next);
    T = T_next;
    res.iterations = k + 1;
    if (residual <= options.tol) {
      res.log.status = SolveStatus::Converged;
      break;
    }
  }

  res.dual = std::move(lam);
  res.trajectory = std::move(last_primal);
  res.T_inf = T;
  res.dual_objective = last_value;
  return res;
}

double max_constraint_violation(const Trajectory& traj, const LtiProblem& p,
                                const RiccatiData& ric, const EllipsoidS& S) {
  Trajectory full = traj;
  std::size_t end = full.horizon;
  try {
    end += hitting_time(ric, S, full.states[full.horizon]);
  } catch (const ClqrError&) {
    end += kDefaultHittingCap;
  }
  extend_lq_tail(full, p.A, p.B, ric.K, end);
  double worst = 0.0;
  for (std::size_t i = 0; i < end; ++i) {
    if (p.pu() > 0) worst = std::max(worst, (p.Cu * full.inputs[i] - p.cu).maxCoeff());
    if (p.px() > 0) worst = std::max(worst, (p.Cx * full.states[i + 1] - p.cx).maxCoeff());
  }
  return worst;
}

namespace {

// Equality-constrained re-solve in the pre-stabilized inputs v_i = u_i - K x_i,
// which keeps the condensed matrices well conditioned for unstable A.
class PolishQp {
 public:
  PolishQp(const LtiProblem& p, const RiccatiData& ric, std::size_t N) : p_(p), ric_(ric), N_(N) {
    const auto n = p.n();
    const auto m = p.m();
    const auto Nm = static_cast<Eigen::Index>(N) * m;
    // x_i = Phi_i x0 + Gamma_i v
    Phi_.assign(N + 1, Matrix());
    Gamma_.assign(N + 1, Matrix());
    Phi_[0] = Matrix::Identity(n, n);
    Gamma_[0] = Matrix::Zero(n, Nm);
    for (std::size_t i = 0; i < N; ++i) {
      Phi_[i + 1] = ric.A_cl * Phi_[i];
      Gamma_[i + 1] = ric.A_cl * Gamma_[i];
      Gamma_[i + 1].middleCols(static_cast<Eigen::Index>(i) * m, m) += p.B;
    }
    H_ = Matrix::Zero(Nm, Nm);
    h_ = Vector::Zero(Nm);
    const Vector& x0 = p.x_init;
    for (std::size_t i = 0; i <= N; ++i) {
      const Matrix& W = (i == N) ? ric.P : p.Q;
      H_.noalias() += Gamma_[i].transpose() * W * Gamma_[i];
      h_.noalias() += Gamma_[i].transpose() * (W * (Phi_[i] * x0));
      if (i == N) break;
      // u_i = K x_i + v_i
      Matrix U = ric.K * Gamma_[i];
      U.middleCols(static_cast<Eigen::Index>(i) * m, m) += Matrix::Identity(m, m);
      H_.noalias() += U.transpose() * p.R * U;
      h_.noalias() += U.transpose() * (p.R * (ric.K * (Phi_[i] * x0)));
    }
    H_ = 0.5 * (H_ + H_.transpose());
  }

  // Row `r` of stage block `i` as a v-affine function: a' v + b <= c.
  void row(std::size_t i, Eigen::Index r, Vector& a, double& b, double& c) const {
    const auto m = p_.m();
    const Vector& x0 = p_.x_init;
    if (r < p_.pu()) {
      Matrix U = p_.Cu.row(r) * ric_.K * Gamma_[i];
      U.middleCols(static_cast<Eigen::Index>(i) * m, m) += p_.Cu.row(r);
      a = U.transpose();
      b = (p_.Cu.row(r) * ric_.K * Phi_[i] * x0)(0);
      c = p_.cu(r);
    } else {
      const Eigen::Index q = r - p_.pu();
      a = (p_.Cx.row(q) * Gamma_[i + 1]).transpose();
      b = (p_.Cx.row(q) * Phi_[i + 1] * x0)(0);
      c = p_.cx(q);
    }
  }

  struct Solution {
    Vector v;
    Vector multipliers;
    bool singular = false;
  };

  Solution solve(const std::vector<std::pair<std::size_t, Eigen::Index>>& active) const {
    const Eigen::Index nv = H_.rows();
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix K = Matrix::Zero(nv + na, nv + na);
    Vector rhs = Vector::Zero(nv + na);
    K.topLeftCorner(nv, nv) = H_;
    rhs.head(nv) = -h_;
    for (Eigen::Index j = 0; j < na; ++j) {
      Vector a;
      double b = 0.0;
      double c = 0.0;
      row(active[static_cast<std::size_t>(j)].first, active[static_cast<std::size_t>(j)].second,
          a, b, c);
      K.block(0, nv + j, nv, 1) = a;
      K.block(nv + j, 0, 1, nv) = a.transpose();
      rhs(nv + j) = c - b;
    }
    Solution sol;
    Eigen::FullPivLU<Matrix> lu(K);
    lu.setThreshold(1e-12);
    Vector z;
    if (lu.rank() == K.rows()) {
      z = lu.solve(rhs);
    } else {
      sol.singular = true;
      z = K.completeOrthogonalDecomposition().solve(rhs);
    }
    sol.v = z.head(nv);
    sol.multipliers = z.tail(na);
    return sol;
  }

  Trajectory rollout(const Vector& v) const {
    const auto m = p_.m();
    Trajectory traj;
    traj.horizon = N_;
    traj.states.push_back(p_.x_init);
    for (std::size_t i = 0; i < N_; ++i) {
      const Vector& x = traj.states.back();
      Vector u = ric_.K * x + v.segment(static_cast<Eigen::Index>(i) * m, m);
      Vector next = p_.A * x + p_.B * u;
      traj.inputs.push_back(std::move(u));
      traj.states.push_back(std::move(next));
    }
    return traj;
  }

 private:
  const LtiProblem& p_;
  const RiccatiData& ric_;
  std::size_t N_;
  std::vector<Matrix> Phi_;
  std::vector<Matrix> Gamma_;
  Matrix H_;
  Vector h_;
};

constexpr double kPolishFeasTol = 1e-10;
constexpr int kPolishRounds = 50;

// First (stage, row) whose violation is largest, if any exceeds the tolerance.
std::optional<std::pair<std::size_t, Eigen::Index>> worst_row(const Trajectory& traj,
                                                              const LtiProblem& p,
                                                              std::size_t stages) {
  double worst = kPolishFeasTol;
  std::optional<std::pair<std::size_t, Eigen::Index>> out;
  for (std::size_t i = 0; i < stages; ++i) {
    for (Eigen::Index r = 0; r < p.pu(); ++r) {
      const double v = p.Cu.row(r).dot(traj.inputs[i]) - p.cu(r);
      if (v > worst) {
        worst = v;
        out = std::make_pair(i, r);
      }
    }
    for (Eigen::Index r = 0; r < p.px(); ++r) {
      const double v = p.Cx.row(r).dot(traj.states[i + 1]) - p.cx(r);
      if (v > worst) {
        worst = v;
        out = std::make_pair(i, p.pu() + r);
      }
    }
  }
  return out;
}

}  // namespace

SolveResult kkt_polish(SolveResult result, const LtiProblem& p, const RiccatiData& ric,
                       const EllipsoidS& S, double active_tol) {
  std::vector<std::pair<std::size_t, Eigen::Index>> active;
  for (std::size_t i = 0; i < result.dual.support(); ++i) {
    const Vector& blk = result.dual.blocks[i];
    for (Eigen::Index r = 0; r < blk.size(); ++r) {
      if (blk(r) < -active_tol) active.emplace_back(i, r);
    }
  }

  Trajectory current = result.trajectory;
  extend_lq_tail(current, p.A, p.B, ric.K, result.T_inf);
  std::size_t margin = 1;
  try {
    margin += hitting_time(ric, S, current.states[result.T_inf]);
  } catch (const ClqrError&) {
    margin += 10;
  }
  std::size_t N = std::max<std::size_t>(result.T_inf + margin, 1);

  bool singular = false;
  Trajectory traj;
  for (int round = 0; round < kPolishRounds; ++round) {
    const PolishQp qp(p, ric, N);
    const auto sol = qp.solve(active);
    singular = singular || sol.singular;
    traj = qp.rollout(sol.v);

    // Extend the check through the LQ tail until S is reached.
    Trajectory probe = traj;
    std::size_t end = N;
    try {
      end += hitting_time(ric, S, probe.states[N]);
    } catch (const ClqrError&) {
      end += 10;
    }
    extend_lq_tail(probe, p.A, p.B, ric.K, end);
    const auto violated = worst_row(probe, p, end);
    if (violated) {
      if (violated->first >= N) {
        N = violated->first + margin;
      }
      active.push_back(*violated);
      continue;
    }
    // Feasible: release the row whose multiplier has the wrong sign, if any.
    Eigen::Index drop = -1;
    double most_negative = -1e-9;
    for (Eigen::Index j = 0; j < sol.multipliers.size(); ++j) {
      if (sol.multipliers(j) < most_negative) {
        most_negative = sol.multipliers(j);
        drop = j;
      }
    }
    if (drop < 0 || sol.singular) break;
    active.erase(active.begin() + drop);
  }

  result.trajectory = std::move(traj);
  result.polished = true;
  result.polish_singular = singular;
  result.objective = lq_cost(p, ric, result.trajectory);
  result.max_violation = max_constraint_violation(result.trajectory, p, ric, S);
  return result;
}

ClqrSolver::ClqrSolver(LtiProblem problem) : problem_(std::move(problem)) {
  const ValidationReport report = validate(problem_);
  if (!report.ok()) throw ClqrError(ErrorKind::ValidationFailed, report.summary());
  riccati_ = solve_dare(problem_);
  S_ = compute_S(riccati_, problem_);
  lipschitz_ = try_lipschitz_bound(problem_);
}

SolveResult ClqrSolver::solve(const SolverOptions& options, const DualSequence* warm) const {
  return solve_from(problem_.x_init, options, warm);
}

SolveResult ClqrSolver::solve_from(const Vector& x_init, const SolverOptions& options,
                                   const DualSequence* warm) const {
  LtiProblem p = problem_;
  p.x_init = x_init;
  const ClqrDualModel model(p, riccati_, S_, options.hitting_cap);

  SolverOptions opts = options;
  std::optional<double> fixed_L;
  bool fallback = false;
  if (opts.stepsize_mode == StepsizeMode::Fixed) {
    if (opts.fixed_L) {
      fixed_L = opts.fixed_L;
    } else if (lipschitz_) {
      fixed_L = lipschitz_->L_global;
    } else {
      opts.stepsize_mode = StepsizeMode::Backtracking;
      fallback = true;
    }
  }

  DualSequence start;
  if (warm) {
    start = *warm;
    for (auto& blk : start.blocks) blk = blk.cwiseMin(0.0);
  }
  SolveResult res = run_afbs(model, opts, start, start.support(), fixed_L);
  res.stepsize_fallback = fallback;
  if (opts.polish) {
    res = kkt_polish(std::move(res), p, riccati_, S_, opts.active_tol);
  } else {
    res.objective = lq_cost(p, riccati_, res.trajectory);
    res.max_violation = max_constraint_violation(res.trajectory, p, riccati_, S_);
  }
  return res;
}

SolveResult solve(const LtiProblem& problem, const SolverOptions& options) {
  const ClqrSolver solver(problem);
  return solver.solve(options);
}

}  // namespace clqr
