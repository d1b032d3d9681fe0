#include "clqr/dual_sequence.hpp"

#include <algorithm>
#include <limits>

namespace clqr {

DualSequence DualSequence::zeros(std::size_t support, Eigen::Index block_rows) {
  DualSequence d;
  d.blocks.assign(support, Vector::Zero(block_rows));
  return d;
}

double DualSequence::max_entry() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() > 0) worst = std::max(worst, b.maxCoeff());
  }
  return worst;
}

DualSequence extrapolate(const DualSequence& current, const DualSequence& previous, double alpha) {
  const std::size_t len = std::max(current.support(), previous.support());
  DualSequence out;
  out.blocks.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const bool has_cur = i < current.support();
    const bool has_prev = i < previous.support();
    if (has_cur && has_prev) {
      out.blocks.push_back(current.blocks[i] + alpha * (current.blocks[i] - previous.blocks[i]));
    } else if (has_cur) {
      out.blocks.push_back((1.0 + alpha) * current.blocks[i]);
    } else {
      out.blocks.push_back(-alpha * previous.blocks[i]);
    }
  }
  return out;
}

DualSequence projected_step(const DualSequence& y, const BlockSequence& grad, double step,
                            std::size_t support, Eigen::Index block_rows) {
  DualSequence out;
  out.blocks.reserve(support);
  for (std::size_t i = 0; i < support; ++i) {
    Vector b = i < y.support()
                   ? y.blocks[i]
                   : Vector::Zero(i < grad.size() ? grad[i].size() : block_rows);
    if (i < grad.size()) b -= step * grad[i];
    out.blocks.push_back(b.cwiseMin(0.0));
  }
  return out;
}

BlockSequence difference(const DualSequence& a, const DualSequence& b) {
  const std::size_t len = std::max(a.support(), b.support());
  BlockSequence out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (i < a.support() && i < b.support()) {
      out.push_back(a.blocks[i] - b.blocks[i]);
    } else if (i < a.support()) {
      out.push_back(a.blocks[i]);
    } else {
      out.push_back(-b.blocks[i]);
    }
  }
  return out;
}

}  // namespace clqr
