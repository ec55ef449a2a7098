// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_PROPAGATION_HPP
#define QENET_PROPAGATION_HPP

#include <chrono>
#include <functional>
#include <optional>
#include <vector>

#include "qenet/network.hpp"
#include "qenet/qe.hpp"

namespace qenet {

enum class NeuronStatus {
  Active,    // z >= 0 over the box: ReLU behaves linearly
  Inactive,  // z <= 0 over the box: constant zero output
  Branching  // z-range straddles zero: both ReLU pieces reachable
};

/// Zero-touching ranges count as the linear cases.
NeuronStatus classify_neuron(const Interval& z_range);

/// a-range of a neuron from its z-range, following the ReLU.
Interval relu_interval(const Interval& z_range);

enum class PropagationMode { Precise, OverApproximate };

struct ProgressEvent {
  enum class Kind {
    NeuronClassified,
    LayerFinished,
    Concretized,
    IntervalFallback
  };
  Kind kind;
  int layer = 0;
  int index = 0;
  NeuronStatus status = NeuronStatus::Branching;
  int branching_count = 0;
  double seconds = 0.0;
};

struct PropagationConfig {
  PropagationMode mode = PropagationMode::Precise;
  /// Over-approximate mode concretizes symbolic branching neurons down to
  /// this count after each layer; precise mode never concretizes.
  int branching_budget = 8;
  EliminationBudget per_neuron_budget{};
  int worker_count = 10;
  /// Whole-query deadline shared across layers and subspaces.
  std::optional<std::chrono::steady_clock::time_point> query_deadline;
  std::function<void(const ProgressEvent&)> progress;
};

struct BudgetEvent {
  enum class Kind { Concretize, IntervalFallback };
  Kind kind;
  int layer = 0;
  int index = 0;
};

/// Counts of neuron classifications in one hidden layer.
struct LayerCensus {
  int active = 0, inactive = 0, branching = 0, concretized = 0;
};

struct NeuronState {
  NeuronStatus status = NeuronStatus::Branching;
  Interval z_range, a_range;
  bool precise = true;      // range computed by QE with fully-precise upstream
  bool processed = false;   // classified
  bool collapsed = false;   // linear neuron folded into downstream
  bool symbolic = false;    // branching constraints retained
  bool concretized = false; // branching severed to its a-range
  AffineExpr z_expr;        // weighted sum over surviving variables
  AffineExpr a_expr;        // downstream contribution
};

/// The pruned symbolic encoding of the network restricted to an input box.
/// Always-active neurons are collapsed into affine substitutions,
/// always-inactive ones muted to zero; branching neurons stay symbolic (or
/// are concretized to their a-range in over-approximate mode).
class BehavioralStructure {
 public:
  BehavioralStructure(const Network& net, Box box, PropagationConfig config);

  const Network& network() const { return *net_; }
  const Box& box() const { return box_; }
  const PropagationConfig& config() const { return config_; }
  int branching_count() const { return branching_count_; }
  bool precise_so_far() const { return precise_so_far_; }

  const NeuronState& neuron(NeuronRef n) const;
  const NeuronState& output(int index) const { return outputs_.at(index); }
  int hidden_layer_count() const { return static_cast<int>(hidden_.size()); }
  int layer_size(int layer) const {
    return static_cast<int>(hidden_.at(layer - 1).size());
  }

  /// Weighted-sum expression of a neuron over the surviving variables;
  /// requires the previous layer to be processed.
  AffineExpr weighted_sum_expr(NeuronRef n) const;
  AffineExpr output_expr(int index) const;

  /// Encoding of all upstream surviving constraints reachable from target,
  /// plus target_var = target. Branching disjunctions multiply clauses.
  DnfFormula encode(const AffineExpr& target, VarId target_var,
                    std::size_t max_clauses) const;

  /// Interval evaluation of an expression over the box and the surviving
  /// neurons' a-ranges (the severed-correlation fallback).
  Interval interval_eval(const AffineExpr& expr) const;

  /// Record a computed z-range: classifies, assigns the a-range, updates
  /// branching bookkeeping.
  void classify_and_set(NeuronRef n, Interval z_range, bool range_precise);
  void set_output_range(int index, Interval range, bool range_precise);

  void collapse_linear(NeuronRef n);
  void concretize_branching(NeuronRef n);

  /// Symbolic branching neuron with the smallest a-range width (ties:
  /// earliest layer, lowest index), if any.
  std::optional<NeuronRef> next_concretization_victim() const;

  void mark_imprecise() { precise_so_far_ = false; }

  /// Counts of (active, inactive, branching, concretized) per hidden layer.
  struct LayerCensus {
    int active = 0, inactive = 0, branching = 0, concretized = 0;
  };
  std::vector<LayerCensus> census() const;

 private:
  NeuronState& state(NeuronRef n);

  const Network* net_;
  Box box_;
  PropagationConfig config_;
  std::vector<std::vector<NeuronState>> hidden_;
  std::vector<NeuronState> outputs_;
  int branching_count_ = 0;
  bool precise_so_far_ = true;
};

/// Value-semantics wrappers over the structure mutations.
BehavioralStructure collapse_linear(BehavioralStructure structure,
                                    NeuronRef neuron);
BehavioralStructure concretize_branching(BehavioralStructure structure,
                                         NeuronRef neuron);

/// z-range of one neuron from the encoding of its full upstream sub-graph.
/// In over-approximate mode a budget failure falls back to interval
/// arithmetic over upstream a-ranges; precise mode propagates the error.
Interval neuron_z_range(const BehavioralStructure& structure, NeuronRef neuron,
                        const PropagationConfig& config,
                        bool* used_fallback = nullptr,
                        EliminationStats* stats = nullptr);

struct RangeResult {
  std::vector<Interval> outputs;
  bool precise = true;
  std::vector<double> layer_seconds;     // hidden layers, then output layer
  std::vector<int> branching_per_layer;  // symbolic count after each layer
  std::vector<BudgetEvent> events;
  EliminationStats stats;
  double seconds = 0.0;
};

struct PropagationOutcome {
  RangeResult range;
  BehavioralStructure structure;
};

/// Layer-by-layer forward range propagation over the box.
PropagationOutcome propagate(const Network& net, const Box& box,
                             const PropagationConfig& config = {});

}  // namespace qenet

#endif
