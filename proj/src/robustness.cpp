// SPDX-License-Identifier: Apache-2.0

#include "qenet/robustness.hpp"

#include <chrono>

namespace qenet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Strict interval separation of the reference label against competitor j.
bool separated(const std::vector<Interval>& outputs, int label, int j,
               SelectionRule rule) {
  const Interval& mine = outputs[label];
  const Interval& other = outputs[j];
  if (rule == SelectionRule::ArgMin)
    return mine.upper && other.lower && *mine.upper < *other.lower;
  return mine.lower && other.upper && *mine.lower > *other.upper;
}

// Is there a point in the subspace where competitor j reaches (or crosses)
// the reference label? Conjoins the margin constraint onto the behavioral
// encoding and tests satisfiability.
bool dominance_violated(const BehavioralStructure& structure, int label,
                        int j, SelectionRule rule,
                        const EliminationBudget& budget) {
  AffineExpr margin = structure.output_expr(j) - structure.output_expr(label);
  if (rule == SelectionRule::ArgMax) margin = -margin;
  const VarId mvar = VarId::output(j);  // carries the margin of j vs. label
  DnfFormula formula = structure.encode(margin, mvar, budget.max_clauses);
  AffineExpr violation = AffineExpr::variable(mvar);  // margin <= 0
  for (const auto& clause : formula.clauses()) {
    Clause test = clause;
    test.insert(Atom(violation, Rel::Le));
    test.simplify();
    if (!test.is_false() && clause_satisfiable(test)) return true;
  }
  return false;
}

}  // namespace

Box delta_ball(const Network& net, const std::vector<Rational>& x0,
               const Rational& delta) {
  if (x0.size() != static_cast<std::size_t>(net.input_dim()))
    throw DimensionError("reference point dimension mismatch");
  if (delta.sign() <= 0)
    throw PreconditionError("delta must be positive");
  Box domain = net.normalized_domain();
  std::vector<Interval> dims;
  dims.reserve(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const Interval& dom = domain.dims[i];
    if (!dom.contains(x0[i]))
      throw PreconditionError(
          "reference point outside the normalized input domain at dimension " +
          std::to_string(i));
    dims.push_back(Interval::closed(max(*dom.lower, x0[i] - delta),
                                    min(*dom.upper, x0[i] + delta)));
  }
  return Box(std::move(dims));
}

RobustnessVerdict check_delta_robustness(const Network& net,
                                         const std::vector<Rational>& x0,
                                         const Rational& delta,
                                         const PartitionPlan& plan,
                                         const PropagationConfig& config,
                                         SelectionRule rule,
                                         bool constraint_disambiguation) {
  const auto start = Clock::now();
  RobustnessVerdict verdict;

  std::vector<Rational> y0 = evaluate_exact(net, x0);
  verdict.reference_ties =
      rule == SelectionRule::ArgMin ? minimal_outputs(y0) : maximal_outputs(y0);
  if (verdict.reference_ties.size() != 1) {
    verdict.kind = RobustnessVerdict::Kind::Unknown;
    verdict.seconds = seconds_since(start);
    return verdict;
  }
  const int label = verdict.reference_ties.front();
  verdict.label = label;

  Box ball = delta_ball(net, x0, delta);
  verdict.ranges = propagate_partitioned(net, ball, plan, config);
  verdict.precise = verdict.ranges.precise;

  // Per-subspace separation; the same label must win everywhere.
  std::vector<std::size_t> failing;
  std::set<int> overlap;
  for (std::size_t s = 0; s < verdict.ranges.per_subspace.size(); ++s) {
    const auto& outputs = verdict.ranges.per_subspace[s].outputs;
    bool ok = true;
    for (int j = 0; j < net.output_dim(); ++j) {
      if (j == label || separated(outputs, label, j, rule)) continue;
      overlap.insert(j);
      ok = false;
    }
    if (!ok) failing.push_back(s);
  }

  if (failing.empty()) {
    verdict.kind = RobustnessVerdict::Kind::Robust;
    verdict.seconds = seconds_since(start);
    return verdict;
  }

  if (constraint_disambiguation) {
    // Re-encode the failing subspaces and test dominance directly.
    bool all_separated = true;
    for (std::size_t s : failing) {
      auto outcome = propagate(net, verdict.ranges.subspaces[s], config);
      for (int j = 0; j < net.output_dim() && all_separated; ++j) {
        if (j == label) continue;
        if (separated(outcome.range.outputs, label, j, rule)) continue;
        if (dominance_violated(outcome.structure, label, j, rule,
                               config.per_neuron_budget))
          all_separated = false;
      }
      if (!all_separated) break;
    }
    if (all_separated) {
      verdict.kind = RobustnessVerdict::Kind::Robust;
      verdict.disambiguated = true;
      verdict.seconds = seconds_since(start);
      return verdict;
    }
  }

  verdict.kind = RobustnessVerdict::Kind::Unknown;
  verdict.overlapping.assign(overlap.begin(), overlap.end());
  verdict.seconds = seconds_since(start);
  return verdict;
}

DeltaEpsilonResult delta_to_epsilon(const Network& net,
                                    const std::vector<Rational>& x0,
                                    const Rational& delta, int output_index,
                                    const PartitionPlan& plan,
                                    const PropagationConfig& config) {
  const auto start = Clock::now();
  if (output_index < 0 || output_index >= net.output_dim())
    throw PreconditionError("output index out of range");
  DeltaEpsilonResult result;
  result.reference_input = x0;
  result.reference_output = evaluate_exact(net, x0)[output_index];

  Box ball = delta_ball(net, x0, delta);
  if (plan.is_identity()) {
    auto outcome = propagate(net, ball, config);
    result.ranges.outputs = outcome.range.outputs;
    result.ranges.precise = outcome.range.precise;
    result.ranges.subspaces = {ball};
    result.ranges.per_subspace = {outcome.range};
    result.structure = std::move(outcome.structure);
  } else {
    result.ranges = propagate_partitioned(net, ball, plan, config);
  }
  result.precise = result.ranges.precise;
  result.output_range = result.ranges.outputs[output_index];
  if (!result.output_range.bounded())
    throw Error("unbounded output range");
  result.epsilon = max((*result.output_range.upper - result.reference_output).abs(),
                       (result.reference_output - *result.output_range.lower).abs());
  result.seconds = seconds_since(start);
  return result;
}

EpsilonDeltaResult epsilon_to_delta(const DeltaEpsilonResult& forward,
                                    const Rational& delta0,
                                    const Rational& epsilon_star,
                                    const PropagationConfig& config,
                                    int output_index) {
  const auto start = Clock::now();
  if (epsilon_star.sign() < 0)
    throw PreconditionError("epsilon* must be non-negative");
  if (!(epsilon_star < forward.epsilon))
    throw PreconditionError(
        "epsilon* must be below the deviation at delta0 (epsilon* = " +
        epsilon_star.to_string() + ", epsilon(delta0) = " +
        forward.epsilon.to_string() + ")");
  if (!forward.structure)
    throw PreconditionError(
        "backward derivation needs the unpartitioned behavioral structure");

  const BehavioralStructure& structure = *forward.structure;
  const EliminationBudget& budget = config.per_neuron_budget;
  const VarId dvar = VarId::perturbation();
  const VarId yvar = VarId::output(output_index);
  const Rational& y0 = forward.reference_output;
  const std::vector<Rational>& x0 = forward.reference_input;

  AffineExpr out_expr = structure.output_expr(output_index);
  DnfFormula encoding = structure.encode(out_expr, yvar, budget.max_clauses);

  // |x - x0|_inf <= delta, for every input dimension the encoding mentions.
  Clause ball;
  for (VarId v : encoding.free_vars()) {
    if (v.role != VarRole::Input) continue;
    AffineExpr above = AffineExpr::variable(v);  // x - x0 - delta <= 0
    above.add_constant(-x0.at(v.index));
    above.add_term(dvar, Rational(-1));
    ball.insert(Atom(std::move(above), Rel::Le));
    AffineExpr below{x0.at(v.index)};  // x0 - x - delta <= 0
    below.add_term(v, Rational(-1));
    below.add_term(dvar, Rational(-1));
    ball.insert(Atom(std::move(below), Rel::Le));
  }
  DnfFormula antecedent = encoding.conjoin(DnfFormula(ball));

  Clause within;  // |y - y0| <= epsilon*
  {
    AffineExpr above = AffineExpr::variable(yvar);
    above.add_constant(-y0 - epsilon_star);
    within.insert(Atom(std::move(above), Rel::Le));
    AffineExpr below{y0 - epsilon_star};
    below.add_term(yvar, Rational(-1));
    within.insert(Atom(std::move(below), Rel::Le));
  }
  DnfFormula consequent{within};

  auto quantified_set = antecedent.free_vars();
  auto cv = consequent.free_vars();
  quantified_set.insert(cv.begin(), cv.end());
  quantified_set.erase(dvar);
  std::vector<VarId> quantified(quantified_set.begin(), quantified_set.end());

  DnfFormula residual = eliminate_universal_implication(
      antecedent, consequent, quantified, budget);

  Clause side;  // 0 <= delta <= delta0
  side.insert(Atom(AffineExpr::variable(dvar, Rational(-1)), Rel::Le));
  {
    AffineExpr e = AffineExpr::variable(dvar);
    e.add_constant(-delta0);
    side.insert(Atom(std::move(e), Rel::Le));
  }
  DnfFormula feasible = residual.conjoin(DnfFormula(side));

  EpsilonDeltaResult result;
  result.epsilon_reference = forward.epsilon;
  result.reference_precise = forward.precise;
  try {
    Interval iv = variable_range(feasible, dvar, budget);
    if (!iv.upper) throw Error("unbounded delta residual");
    result.delta_star = *iv.upper;
  } catch (const EmptyRangeError&) {
    // The structure is too coarse to certify any positive radius; the
    // zero perturbation trivially keeps the deviation at zero.
    result.delta_star = Rational(0);
  }
  result.sound = forward.precise || result.delta_star <= delta0;
  result.seconds = seconds_since(start);
  return result;
}

EpsilonDeltaResult epsilon_to_delta(const Network& net,
                                    const std::vector<Rational>& x0,
                                    const Rational& delta0,
                                    const Rational& epsilon_star,
                                    const PropagationConfig& config,
                                    int output_index) {
  const auto start = Clock::now();
  DeltaEpsilonResult forward =
      delta_to_epsilon(net, x0, delta0, output_index,
                       PartitionPlan::identity(net.input_dim()), config);
  EpsilonDeltaResult result =
      epsilon_to_delta(forward, delta0, epsilon_star, config, output_index);
  result.seconds = seconds_since(start);
  return result;
}

PropertyResult verify_io_property(const Network& net, const PropertySpec& spec,
                                  const PartitionPlan& plan,
                                  const PropagationConfig& config) {
  const auto start = Clock::now();
  for (VarId v : spec.output_predicate.free_vars())
    if (v.role != VarRole::Output)
      throw PreconditionError(
          "output predicate mentions a non-output variable: " + v.name());

  PropertyResult result;
  result.ranges =
      propagate_partitioned(net, spec.input_box, plan, config);

  DnfFormula negated = negate_formula(spec.output_predicate,
                                      config.per_neuron_budget.max_clauses);

  // A subspace is certified when no output valuation inside its intervals
  // can violate the predicate.
  for (std::size_t s = 0; s < result.ranges.per_subspace.size(); ++s) {
    const auto& outputs = result.ranges.per_subspace[s].outputs;
    Clause bounds;
    for (std::size_t o = 0; o < outputs.size(); ++o)
      bounds.insert_all(
          interval_atoms(VarId::output(static_cast<int>(o)), outputs[o]));
    bool violated = false;
    for (const auto& clause : negated.clauses()) {
      Clause test = bounds.conjoin(clause);
      if (!test.is_false() && clause_satisfiable(test)) {
        violated = true;
        break;
      }
    }
    if (violated) result.violating_subspaces.push_back(s);
  }
  result.verdict = result.violating_subspaces.empty()
                       ? PropertyVerdict::Holds
                       : PropertyVerdict::Unknown;
  result.seconds = seconds_since(start);
  return result;
}

}  // namespace qenet
