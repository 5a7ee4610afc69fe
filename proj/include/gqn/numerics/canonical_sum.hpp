#pragma once

#include <algorithm>
#include <span>
#include <vector>

namespace gqn::numerics {

/// Sums `terms` after sorting them ascending. The result depends only on the
/// multiset of terms, never on their storage order, which is what makes set
/// reductions (softmax normalisers, attention sums, mean pooling) bit-exact
/// under permutation. `terms` is reordered in place.
inline double canonical_sum(std::span<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

inline double canonical_sum(std::vector<double> terms) {
  return canonical_sum(std::span<double>(terms));
}

}  // namespace gqn::numerics
