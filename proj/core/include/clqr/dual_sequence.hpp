#pragma once

#include "clqr/problem.hpp"

#include <cstddef>
#include <vector>

namespace clqr {

/// Finite-support multiplier sequence lambda_0 .. lambda_{T-1}; every block
/// beyond the support is implicitly zero. Stage blocks are ordered
/// [input rows (p_u); state rows (p_x)], the state rows of block i pairing
/// with the constraint on x_{i+1}.
struct DualSequence {
  BlockSequence blocks;

  std::size_t support() const { return blocks.size(); }
  bool empty() const { return blocks.empty(); }

  static DualSequence zeros(std::size_t support, Eigen::Index block_rows);

  /// Largest entry over all blocks (<= 0 for a dual-feasible sequence).
  double max_entry() const;
};

/// Entry-wise a + s * (b - a) over the union support, padding with zeros.
DualSequence extrapolate(const DualSequence& current, const DualSequence& previous, double alpha);

/// min(y - step * g, 0) blockwise over `support` blocks; missing blocks of
/// y or g count as zero.
DualSequence projected_step(const DualSequence& y, const BlockSequence& grad, double step,
                            std::size_t support, Eigen::Index block_rows);

/// a - b over the union support.
BlockSequence difference(const DualSequence& a, const DualSequence& b);

}  // namespace clqr
