// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_ROBUSTNESS_HPP
#define QENET_ROBUSTNESS_HPP

#include <optional>
#include <vector>

#include "qenet/partition.hpp"

namespace qenet {

/// How the advisory label is read off the output vector. ACAS Xu selects
/// the minimal z-value.
enum class SelectionRule { ArgMin, ArgMax };

/// L-infinity delta-ball around x0, intersected with the valid normalized
/// input domain. x0 must lie inside the domain.
Box delta_ball(const Network& net, const std::vector<Rational>& x0,
               const Rational& delta);

struct RobustnessVerdict {
  enum class Kind { Robust, Unknown };
  Kind kind = Kind::Unknown;
  int label = -1;                  // label at x0 under the selection rule
  std::vector<int> reference_ties; // outputs tied at x0 (size > 1: Unknown)
  std::vector<int> overlapping;    // competitors not strictly separated
  bool disambiguated = false;      // separation shown by dominance encoding
  PartitionedRangeResult ranges;
  bool precise = false;
  double seconds = 0.0;

  bool robust() const { return kind == Kind::Robust; }
};

/// Def.-1-style check: does every input in the delta-ball get the label of
/// x0? Interval comparison per subspace; optionally, on overlap, a second
/// pass conjoins the dominance constraint per competitor and tests the
/// encoding directly.
RobustnessVerdict check_delta_robustness(
    const Network& net, const std::vector<Rational>& x0, const Rational& delta,
    const PartitionPlan& plan, const PropagationConfig& config,
    SelectionRule rule = SelectionRule::ArgMin,
    bool constraint_disambiguation = false);

struct DeltaEpsilonResult {
  Rational epsilon;
  bool precise = false;
  Interval output_range;
  std::vector<Rational> reference_input;  // x0, the ball center
  Rational reference_output;              // exact f(x0) at the output
  PartitionedRangeResult ranges;
  /// Populated for identity plans; the behavioral structure reused by the
  /// backward derivation.
  std::optional<BehavioralStructure> structure;
  double seconds = 0.0;
};

/// Largest output deviation over the delta-ball for one output neuron.
DeltaEpsilonResult delta_to_epsilon(const Network& net,
                                    const std::vector<Rational>& x0,
                                    const Rational& delta, int output_index,
                                    const PartitionPlan& plan,
                                    const PropagationConfig& config);

struct EpsilonDeltaResult {
  Rational delta_star;
  bool sound = false;
  Rational epsilon_reference;  // epsilon at delta0, for the precondition
  bool reference_precise = false;
  double seconds = 0.0;
};

/// Backward derivation: the largest delta <= delta0 such that every input
/// within delta of x0 keeps the output within epsilon_star of f(x0). The
/// universal implication is eliminated over the delta0 behavioral
/// structure with delta as the only free variable.
EpsilonDeltaResult epsilon_to_delta(const Network& net,
                                    const std::vector<Rational>& x0,
                                    const Rational& delta0,
                                    const Rational& epsilon_star,
                                    const PropagationConfig& config,
                                    int output_index = 0);

/// Same derivation, reusing an already-computed forward result (must carry
/// a structure, i.e. stem from an identity plan).
EpsilonDeltaResult epsilon_to_delta(const DeltaEpsilonResult& forward,
                                    const Rational& delta0,
                                    const Rational& epsilon_star,
                                    const PropagationConfig& config,
                                    int output_index = 0);

struct PropertySpec {
  Box input_box;
  DnfFormula output_predicate;  // over Output-role variables
  SelectionRule rule = SelectionRule::ArgMin;
};

enum class PropertyVerdict { Holds, Unknown };

struct PropertyResult {
  PropertyVerdict verdict = PropertyVerdict::Unknown;
  PartitionedRangeResult ranges;
  std::vector<std::size_t> violating_subspaces;
  double seconds = 0.0;

  bool holds() const { return verdict == PropertyVerdict::Holds; }
};

/// Does every output valuation permitted by the per-subspace intervals
/// satisfy the predicate? Over-approximate results can still prove Holds.
PropertyResult verify_io_property(const Network& net, const PropertySpec& spec,
                                  const PartitionPlan& plan,
                                  const PropagationConfig& config);

}  // namespace qenet

#endif
