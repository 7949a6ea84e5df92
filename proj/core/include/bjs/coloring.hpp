#pragma once

#include <vector>

#include "bjs/cocycle.hpp"
#include "bjs/model.hpp"

namespace bjs {

// Greedy conflict coloring: within every class, any two distinct elements
// alpha, beta satisfy ||alpha^-1 beta||_sigma >= threshold.
struct ColoringPartition {
  double threshold = 0;
  std::vector<std::vector<int>> classes;  // indices into the input list
  size_t conflict_set_size = 0;           // N = #{input elements with magnitude < threshold}
};

// Colors the input in its given order (BFS-then-lexicographic by contract),
// assigning each element the smallest color absent among earlier conflicting
// elements.  The conflict test is the direct magnitude condition.
ColoringPartition magnitude_partition(const GroupModel& m, const std::vector<GroupElement>& elements,
                                      double threshold, const CocycleSpec& spec);

}  // namespace bjs
