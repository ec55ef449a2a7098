// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_PARTITION_HPP
#define QENET_PARTITION_HPP

#include <vector>

#include "qenet/propagation.hpp"

namespace qenet {

/// Uniform input-space partition: per-dimension segment counts.
struct PartitionPlan {
  std::vector<int> segments;
  std::size_t subspace_cap = 1024;

  static PartitionPlan identity(std::size_t dimension) {
    return PartitionPlan{std::vector<int>(dimension, 1)};
  }
  static PartitionPlan uniform(std::size_t dimension, int per_dimension) {
    return PartitionPlan{std::vector<int>(dimension, per_dimension)};
  }

  bool is_identity() const {
    for (int s : segments)
      if (s != 1) return false;
    return true;
  }

  std::size_t subspace_count() const {
    std::size_t n = 1;
    for (int s : segments) n *= static_cast<std::size_t>(s);
    return n;
  }
};

/// Tile the box exactly: shared faces, no gaps, no interior overlap.
std::vector<Box> partition_box(const Box& box, const PartitionPlan& plan);

struct PartitionedRangeResult {
  std::vector<Interval> outputs;  // per-output hull over subspaces
  bool precise = true;
  std::vector<Box> subspaces;
  std::vector<RangeResult> per_subspace;
  double seconds = 0.0;
};

/// Propagate each subspace independently (parallel across subspaces) and
/// hull the per-output intervals.
PartitionedRangeResult propagate_partitioned(const Network& net,
                                             const Box& box,
                                             const PartitionPlan& plan,
                                             const PropagationConfig& config);

}  // namespace qenet

#endif
