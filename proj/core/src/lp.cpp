#include "clqr/lp.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace clqr {

LpResult maximize_over_polytope(const Vector& c, const Matrix& G, const Vector& h) {
  const Eigen::Index q = G.rows();
  const Eigen::Index n = G.cols();
  if (h.size() != q || c.size() != n) throw std::invalid_argument("LP dimension mismatch");
  if (q > 0 && h.minCoeff() < 0.0) throw std::invalid_argument("LP requires h >= 0");

  // Columns: x+ (n), x- (n), slacks (q), rhs.
  const Eigen::Index cols = 2 * n + q;
  Matrix tab = Matrix::Zero(q, cols + 1);
  tab.leftCols(n) = G;
  tab.middleCols(n, n) = -G;
  tab.middleCols(2 * n, q) = Matrix::Identity(q, q);
  tab.col(cols) = h;

  // Reduced costs for maximization: z_j - c_j; entering column has negative value.
  Vector cost = Vector::Zero(cols);
  cost.head(n) = c;
  cost.segment(n, n) = -c;
  Vector reduced = -cost;
  double objective = 0.0;

  std::vector<Eigen::Index> basis(q);
  for (Eigen::Index i = 0; i < q; ++i) basis[i] = 2 * n + i;

  constexpr double eps = 1e-12;
  const std::size_t max_pivots = 50 * static_cast<std::size_t>(cols + q) + 1000;
  LpResult res;
  for (std::size_t pivots = 0;; ++pivots) {
    if (pivots > max_pivots) {
      res.status = LpStatus::IterationLimit;
      break;
    }
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (reduced(j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      res.status = LpStatus::Optimal;
      break;
    }
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < q; ++i) {
      const double a = tab(i, enter);
      if (a > eps) {
        const double ratio = tab(i, cols) / a;
        if (ratio < best_ratio - eps ||
            (ratio <= best_ratio + eps && leave >= 0 && basis[i] < basis[leave])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
    }
    if (leave < 0) {
      res.status = LpStatus::Unbounded;
      res.value = std::numeric_limits<double>::infinity();
      return res;
    }
    const double piv = tab(leave, enter);
    tab.row(leave) /= piv;
    for (Eigen::Index i = 0; i < q; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    const double f = reduced(enter);
    reduced -= f * tab.row(leave).head(cols).transpose();
    objective -= f * tab(leave, cols);
    basis[leave] = enter;
  }

  res.value = objective;
  res.x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < q; ++i) {
    const Eigen::Index b = basis[i];
    if (b < n) {
      res.x(b) += tab(i, cols);
    } else if (b < 2 * n) {
      res.x(b - n) -= tab(i, cols);
    }
  }
  res.value = c.dot(res.x);
  return res;
}

}  // namespace clqr
