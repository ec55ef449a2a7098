// SPDX-License-Identifier: Apache-2.0

#include "qenet/propagation.hpp"

#include <algorithm>
#include <chrono>

#include "qenet/parallel.hpp"

namespace qenet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-call budget, tightened by the remaining whole-query deadline.
EliminationBudget effective_budget(const PropagationConfig& config) {
  EliminationBudget b = config.per_neuron_budget;
  if (config.query_deadline) {
    std::chrono::duration<double> remaining =
        *config.query_deadline - Clock::now();
    if (remaining.count() <= 0)
      throw BudgetError(BudgetError::Kind::Timeout, "query deadline exceeded");
    b.deadline = b.deadline ? std::min(*b.deadline, remaining) : remaining;
  }
  return b;
}

void emit(const PropagationConfig& config, const ProgressEvent& event) {
  if (config.progress) config.progress(event);
}

}  // namespace

NeuronStatus classify_neuron(const Interval& z_range) {
  if (z_range.lower && z_range.lower->sign() >= 0) return NeuronStatus::Active;
  if (z_range.upper && z_range.upper->sign() <= 0)
    return NeuronStatus::Inactive;
  return NeuronStatus::Branching;
}

Interval relu_interval(const Interval& z_range) {
  if (z_range.upper && z_range.upper->sign() <= 0)
    return Interval::point(Rational(0));
  Rational lo(0);
  bool lo_open = false;
  if (z_range.lower && z_range.lower->sign() >= 0) {
    lo = *z_range.lower;
    lo_open = z_range.lower_open;
  }
  return Interval(std::move(lo), z_range.upper, lo_open, z_range.upper_open);
}

// ---------------------------------------------------------------------------
// BehavioralStructure

BehavioralStructure::BehavioralStructure(const Network& net, Box box,
                                         PropagationConfig config)
    : net_(&net), box_(std::move(box)), config_(std::move(config)) {
  if (box_.dimension() != static_cast<std::size_t>(net.input_dim()))
    throw DimensionError("box dimension " + std::to_string(box_.dimension()) +
                         " does not match input dimension " +
                         std::to_string(net.input_dim()));
  hidden_.resize(net.hidden_layer_count());
  for (int l = 0; l < net.hidden_layer_count(); ++l)
    hidden_[l].resize(net.layer_sizes[l + 1]);
  outputs_.resize(net.output_dim());
}

const NeuronState& BehavioralStructure::neuron(NeuronRef n) const {
  return hidden_.at(n.layer - 1).at(n.index);
}

NeuronState& BehavioralStructure::state(NeuronRef n) {
  return hidden_.at(n.layer - 1).at(n.index);
}

AffineExpr BehavioralStructure::weighted_sum_expr(NeuronRef n) const {
  const auto& matrix = net_->weights.at(n.layer - 1);
  const auto& row = matrix.at(n.index);
  AffineExpr expr{net_->biases.at(n.layer - 1).at(n.index)};
  if (n.layer == 1) {
    for (std::size_t j = 0; j < row.size(); ++j)
      expr.add_term(VarId::input(static_cast<int>(j)), row[j]);
    return expr;
  }
  const auto& prev = hidden_.at(n.layer - 2);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j].is_zero()) continue;
    if (!prev[j].processed)
      throw Error("upstream neuron not yet propagated");
    AffineExpr scaled = prev[j].a_expr;
    scaled *= row[j];
    expr += scaled;
  }
  return expr;
}

AffineExpr BehavioralStructure::output_expr(int index) const {
  const auto& matrix = net_->weights.back();
  const auto& row = matrix.at(index);
  AffineExpr expr{net_->biases.back().at(index)};
  const int last_hidden = hidden_layer_count();
  if (last_hidden == 0) {
    for (std::size_t j = 0; j < row.size(); ++j)
      expr.add_term(VarId::input(static_cast<int>(j)), row[j]);
    return expr;
  }
  const auto& prev = hidden_.back();
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j].is_zero()) continue;
    if (!prev[j].processed)
      throw Error("upstream neuron not yet propagated");
    AffineExpr scaled = prev[j].a_expr;
    scaled *= row[j];
    expr += scaled;
  }
  return expr;
}

DnfFormula BehavioralStructure::encode(const AffineExpr& target,
                                       VarId target_var,
                                       std::size_t max_clauses) const {
  // Dependency cone: surviving variables reachable from the target
  // expression through retained branching constraints.
  std::set<int> input_cone;
  std::set<NeuronRef> symbolic_cone, concretized_cone;
  std::vector<VarId> work;
  std::set<VarId> seen;
  auto push_vars = [&](const AffineExpr& e) {
    for (const auto& [v, c] : e.terms())
      if (seen.insert(v).second) work.push_back(v);
  };
  push_vars(target);
  while (!work.empty()) {
    VarId v = work.back();
    work.pop_back();
    if (v.role == VarRole::Input) {
      input_cone.insert(v.index);
      continue;
    }
    if (v.role != VarRole::Activation)
      throw Error("unexpected variable in encoding: " + v.name());
    NeuronRef n{v.layer, v.index};
    const NeuronState& st = neuron(n);
    if (st.symbolic) {
      if (symbolic_cone.insert(n).second) push_vars(st.z_expr);
    } else if (st.concretized) {
      concretized_cone.insert(n);
    } else {
      throw Error("encoding reached un-collapsed neuron " + v.name());
    }
  }

  Clause base;
  base.insert(Atom(AffineExpr::variable(target_var) - target, Rel::Eq));
  for (int i : input_cone)
    base.insert_all(interval_atoms(VarId::input(i), box_.dims[i]));
  for (const NeuronRef& n : concretized_cone)
    base.insert_all(interval_atoms(VarId::activation(n.layer, n.index),
                                   neuron(n).a_range));
  base.simplify();

  DnfFormula formula{base};
  for (const NeuronRef& n : symbolic_cone) {
    if (formula.size() * 2 > max_clauses)
      throw BudgetError(BudgetError::Kind::Blowup,
                        "branching expansion exceeded clause budget");
    const NeuronState& st = neuron(n);
    const VarId a = VarId::activation(n.layer, n.index);
    DnfFormula next;
    for (const auto& clause : formula.clauses()) {
      Clause active = clause;  // a = z, z >= 0
      active.insert(Atom(AffineExpr::variable(a) - st.z_expr, Rel::Eq));
      active.insert(Atom(-st.z_expr, Rel::Le));
      active.simplify();
      next.add_clause(std::move(active));

      Clause inactive = clause;  // a = 0, z <= 0
      inactive.insert(Atom(AffineExpr::variable(a), Rel::Eq));
      inactive.insert(Atom(st.z_expr, Rel::Le));
      inactive.simplify();
      next.add_clause(std::move(inactive));
    }
    formula = std::move(next);
  }
  formula.normalize();
  return formula;
}

Interval BehavioralStructure::interval_eval(const AffineExpr& expr) const {
  Rational lo = expr.constant();
  Rational hi = expr.constant();
  for (const auto& [v, c] : expr.terms()) {
    Interval iv;
    if (v.role == VarRole::Input) {
      iv = box_.dims.at(v.index);
    } else if (v.role == VarRole::Activation) {
      const NeuronState& st = neuron({v.layer, v.index});
      if (!st.processed) throw Error("interval of unprocessed neuron");
      iv = st.a_range;
    } else {
      throw Error("unexpected variable in interval evaluation: " + v.name());
    }
    if (!iv.bounded()) throw Error("unbounded interval in evaluation");
    if (c.sign() > 0) {
      lo += c * *iv.lower;
      hi += c * *iv.upper;
    } else {
      lo += c * *iv.upper;
      hi += c * *iv.lower;
    }
  }
  return Interval::closed(std::move(lo), std::move(hi));
}

void BehavioralStructure::classify_and_set(NeuronRef n, Interval z_range,
                                           bool range_precise) {
  NeuronState& st = state(n);
  if (st.processed) throw Error("neuron classified twice");
  st.z_expr = weighted_sum_expr(n);
  st.status = classify_neuron(z_range);
  st.a_range = relu_interval(z_range);
  st.z_range = std::move(z_range);
  st.precise = range_precise && precise_so_far_;
  st.processed = true;
  st.a_expr = AffineExpr::variable(VarId::activation(n.layer, n.index));
  if (st.status == NeuronStatus::Branching) {
    st.symbolic = true;
    ++branching_count_;
  }
}

void BehavioralStructure::set_output_range(int index, Interval range,
                                           bool range_precise) {
  NeuronState& st = outputs_.at(index);
  st.z_expr = output_expr(index);
  st.z_range = std::move(range);
  st.a_range = st.z_range;
  st.precise = range_precise && precise_so_far_;
  st.processed = true;
}

void BehavioralStructure::collapse_linear(NeuronRef n) {
  NeuronState& st = state(n);
  if (!st.processed) throw Error("collapse of unclassified neuron");
  if (st.status == NeuronStatus::Branching)
    throw Error("collapse_linear on a branching neuron");
  if (st.collapsed) return;
  st.a_expr = st.status == NeuronStatus::Active ? st.z_expr
                                                : AffineExpr{Rational(0)};
  st.collapsed = true;

  // Rewrite any downstream expressions already built against this a-var.
  const VarId a = VarId::activation(n.layer, n.index);
  for (int l = n.layer; l < hidden_layer_count(); ++l) {
    for (auto& down : hidden_[l]) {
      if (down.z_expr.mentions(a))
        down.z_expr = down.z_expr.substitute(a, st.a_expr);
      if (down.a_expr.mentions(a))
        down.a_expr = down.a_expr.substitute(a, st.a_expr);
    }
  }
  for (auto& out : outputs_) {
    if (out.z_expr.mentions(a))
      out.z_expr = out.z_expr.substitute(a, st.a_expr);
  }
}

void BehavioralStructure::concretize_branching(NeuronRef n) {
  if (config_.mode == PropagationMode::Precise)
    throw Error("concretization is disallowed in precise mode");
  NeuronState& st = state(n);
  if (!st.processed || st.status != NeuronStatus::Branching || !st.symbolic)
    throw Error("concretize_branching requires a symbolic branching neuron");
  st.symbolic = false;
  st.concretized = true;
  --branching_count_;
  precise_so_far_ = false;
}

std::optional<NeuronRef> BehavioralStructure::next_concretization_victim()
    const {
  std::optional<NeuronRef> best;
  Rational best_width(0);
  for (int l = 1; l <= hidden_layer_count(); ++l) {
    for (int i = 0; i < layer_size(l); ++i) {
      const NeuronState& st = hidden_[l - 1][i];
      if (!st.symbolic) continue;
      Rational width = st.a_range.width();
      if (!best || width < best_width) {
        best = NeuronRef{l, i};
        best_width = width;
      }
    }
  }
  return best;
}

std::vector<BehavioralStructure::LayerCensus> BehavioralStructure::census()
    const {
  std::vector<LayerCensus> out;
  for (const auto& layer : hidden_) {
    LayerCensus c;
    for (const auto& st : layer) {
      if (!st.processed) continue;
      switch (st.status) {
        case NeuronStatus::Active: c.active++; break;
        case NeuronStatus::Inactive: c.inactive++; break;
        case NeuronStatus::Branching:
          (st.concretized ? c.concretized : c.branching)++;
          break;
      }
    }
    out.push_back(c);
  }
  return out;
}

BehavioralStructure collapse_linear(BehavioralStructure structure,
                                    NeuronRef neuron) {
  structure.collapse_linear(neuron);
  return structure;
}

BehavioralStructure concretize_branching(BehavioralStructure structure,
                                         NeuronRef neuron) {
  structure.concretize_branching(neuron);
  return structure;
}

// ---------------------------------------------------------------------------
// Range computation

namespace {

Interval target_range(const BehavioralStructure& structure,
                      const AffineExpr& expr, VarId target_var,
                      const PropagationConfig& config, bool* used_fallback,
                      EliminationStats* stats) {
  if (used_fallback) *used_fallback = false;
  EliminationBudget budget = effective_budget(config);
  try {
    DnfFormula formula =
        structure.encode(expr, target_var, budget.max_clauses);
    return variable_range(formula, target_var, budget, stats);
  } catch (const BudgetError&) {
    if (config.mode != PropagationMode::OverApproximate) throw;
    if (used_fallback) *used_fallback = true;
    return structure.interval_eval(expr);
  }
}

}  // namespace

Interval neuron_z_range(const BehavioralStructure& structure, NeuronRef neuron,
                        const PropagationConfig& config, bool* used_fallback,
                        EliminationStats* stats) {
  AffineExpr expr = structure.weighted_sum_expr(neuron);
  return target_range(structure, expr,
                      VarId::weighted_sum(neuron.layer, neuron.index), config,
                      used_fallback, stats);
}

PropagationOutcome propagate(const Network& net, const Box& box,
                             const PropagationConfig& config) {
  const auto start = Clock::now();
  BehavioralStructure structure(net, box, config);
  RangeResult result;

  for (int layer = 1; layer <= net.hidden_layer_count(); ++layer) {
    const auto layer_start = Clock::now();
    const int size = net.layer_sizes[layer];

    std::vector<Interval> ranges(size);
    std::vector<char> fallbacks(size, 0);
    std::vector<EliminationStats> stats(size);
    parallel_for(size, config.worker_count, [&](std::size_t i) {
      bool fb = false;
      try {
        ranges[i] = neuron_z_range(structure, {layer, static_cast<int>(i)},
                                   config, &fb, &stats[i]);
      } catch (const BudgetError& e) {
        throw PropagationError(
            "precise propagation blocked at neuron z" + std::to_string(layer) +
                "_" + std::to_string(i) + " with " +
                std::to_string(structure.branching_count()) +
                " branching neurons upstream: " + e.what(),
            layer, static_cast<int>(i), structure.branching_count());
      }
      fallbacks[i] = fb ? 1 : 0;
    });

    for (int i = 0; i < size; ++i) {
      NeuronRef ref{layer, i};
      // exprs were built before classification; store for the encoding
      structure.classify_and_set(ref, ranges[i], !fallbacks[i]);
      result.stats += stats[i];
      const NeuronState& st = structure.neuron(ref);
      emit(config, {ProgressEvent::Kind::NeuronClassified, layer, i, st.status,
                    structure.branching_count(), 0.0});
      if (st.status != NeuronStatus::Branching) structure.collapse_linear(ref);
    }
    for (int i = 0; i < size; ++i) {
      if (!fallbacks[i]) continue;
      structure.mark_imprecise();
      result.events.push_back({BudgetEvent::Kind::IntervalFallback, layer, i});
      emit(config, {ProgressEvent::Kind::IntervalFallback, layer, i,
                    structure.neuron({layer, i}).status,
                    structure.branching_count(), 0.0});
    }

    if (config.mode == PropagationMode::OverApproximate) {
      while (structure.branching_count() > config.branching_budget) {
        auto victim = structure.next_concretization_victim();
        if (!victim) break;
        structure.concretize_branching(*victim);
        result.events.push_back(
            {BudgetEvent::Kind::Concretize, victim->layer, victim->index});
        emit(config, {ProgressEvent::Kind::Concretized, victim->layer,
                      victim->index, NeuronStatus::Branching,
                      structure.branching_count(), 0.0});
      }
    }

    result.branching_per_layer.push_back(structure.branching_count());
    result.layer_seconds.push_back(seconds_since(layer_start));
    emit(config, {ProgressEvent::Kind::LayerFinished, layer, 0,
                  NeuronStatus::Branching, structure.branching_count(),
                  result.layer_seconds.back()});
  }

  const auto output_start = Clock::now();
  const int outputs = net.output_dim();
  std::vector<AffineExpr> out_exprs(outputs);
  for (int o = 0; o < outputs; ++o) out_exprs[o] = structure.output_expr(o);
  std::vector<Interval> out_ranges(outputs);
  std::vector<char> out_fallbacks(outputs, 0);
  std::vector<EliminationStats> out_stats(outputs);
  parallel_for(outputs, config.worker_count, [&](std::size_t o) {
    bool fb = false;
    try {
      out_ranges[o] =
          target_range(structure, out_exprs[o],
                       VarId::output(static_cast<int>(o)), config, &fb,
                       &out_stats[o]);
    } catch (const BudgetError& e) {
      throw PropagationError(
          "precise propagation blocked at output " + std::to_string(o) +
              " with " + std::to_string(structure.branching_count()) +
              " branching neurons upstream: " + e.what(),
          net.hidden_layer_count() + 1, static_cast<int>(o),
          structure.branching_count());
    }
    out_fallbacks[o] = fb ? 1 : 0;
  });
  for (int o = 0; o < outputs; ++o) {
    structure.set_output_range(o, out_ranges[o], !out_fallbacks[o]);
    result.stats += out_stats[o];
  }
  for (int o = 0; o < outputs; ++o) {
    if (!out_fallbacks[o]) continue;
    structure.mark_imprecise();
    result.events.push_back({BudgetEvent::Kind::IntervalFallback,
                             net.hidden_layer_count() + 1, o});
  }
  result.layer_seconds.push_back(seconds_since(output_start));

  result.outputs = std::move(out_ranges);
  result.precise = structure.precise_so_far();
  result.seconds = seconds_since(start);
  return {std::move(result), std::move(structure)};
}

}  // namespace qenet
