// SPDX-License-Identifier: Apache-2.0

#include "qenet/partition.hpp"

#include <chrono>

#include "qenet/parallel.hpp"

namespace qenet {

std::vector<Box> partition_box(const Box& box, const PartitionPlan& plan) {
  if (plan.segments.size() != box.dimension())
    throw DimensionError("partition plan dimension " +
                         std::to_string(plan.segments.size()) +
                         " does not match box dimension " +
                         std::to_string(box.dimension()));
  for (int s : plan.segments)
    if (s < 1) throw PreconditionError("segment counts must be positive");
  if (plan.subspace_count() > plan.subspace_cap)
    throw PreconditionError("partition produces " +
                            std::to_string(plan.subspace_count()) +
                            " subspaces, above the cap of " +
                            std::to_string(plan.subspace_cap));

  // Per-dimension cut points lo + k*(hi-lo)/segments, exact.
  std::vector<std::vector<Rational>> cuts(box.dimension());
  for (std::size_t d = 0; d < box.dimension(); ++d) {
    const Interval& iv = box.dims[d];
    const int segs = plan.segments[d];
    for (int k = 0; k <= segs; ++k)
      cuts[d].push_back(*iv.lower +
                        (*iv.upper - *iv.lower) * Rational(k, segs));
  }

  std::vector<Box> out;
  out.reserve(plan.subspace_count());
  std::vector<int> idx(box.dimension(), 0);
  for (;;) {
    std::vector<Interval> dims;
    dims.reserve(box.dimension());
    for (std::size_t d = 0; d < box.dimension(); ++d)
      dims.push_back(Interval::closed(cuts[d][idx[d]], cuts[d][idx[d] + 1]));
    out.emplace_back(std::move(dims));

    std::size_t d = 0;
    while (d < box.dimension() && ++idx[d] == plan.segments[d]) idx[d++] = 0;
    if (d == box.dimension()) break;
  }
  return out;
}

PartitionedRangeResult propagate_partitioned(const Network& net,
                                             const Box& box,
                                             const PartitionPlan& plan,
                                             const PropagationConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  PartitionedRangeResult result;
  result.subspaces = partition_box(box, plan);

  const std::size_t count = result.subspaces.size();
  result.per_subspace.resize(count);
  std::vector<std::exception_ptr> errors(count);

  // Subspaces are independent; give each sequential propagation a slot in
  // the shared worker pool.
  PropagationConfig inner = config;
  if (count > 1) inner.worker_count = 1;
  parallel_for(count, count > 1 ? config.worker_count : 1,
               [&](std::size_t i) {
                 try {
                   result.per_subspace[i] =
                       propagate(net, result.subspaces[i], inner).range;
                 } catch (...) {
                   errors[i] = std::current_exception();
                 }
               });
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error("subspace " + std::to_string(i) + " of " +
                  std::to_string(count) + " failed: " + e.what());
    }
  }

  result.precise = true;
  for (std::size_t i = 0; i < count; ++i) {
    const RangeResult& r = result.per_subspace[i];
    result.precise = result.precise && r.precise;
    if (result.outputs.empty()) {
      result.outputs = r.outputs;
    } else {
      for (std::size_t o = 0; o < result.outputs.size(); ++o)
        result.outputs[o] = Interval::hull(result.outputs[o], r.outputs[o]);
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace qenet
