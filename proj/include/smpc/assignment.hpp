#pragma once

#include <cstddef>
#include <vector>

#include "smpc/otcore.hpp"

namespace smpc {

struct Assignment {
  std::vector<std::size_t> sigma;  // agent i -> target sigma[i], 0-based
  double total_cost = 0.0;
};

/// Minimum-cost perfect matching, O(N^3) shortest augmenting paths.
Assignment hungarian(const ot::CostMatrix& c);

/// Exhaustive search over all N! permutations (N <= 9). Ties go to the
/// lexicographically smallest sigma.
Assignment brute_force_assignment(const ot::CostMatrix& c);

}  // namespace smpc
