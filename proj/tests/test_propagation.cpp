// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "qenet/propagation.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

using namespace qenet;
using namespace qenet::testing;

namespace {

PropagationConfig precise_config(int workers = 1) {
  PropagationConfig c;
  c.mode = PropagationMode::Precise;
  c.worker_count = workers;
  return c;
}

PropagationConfig over_config(int budget, int workers = 1) {
  PropagationConfig c;
  c.mode = PropagationMode::OverApproximate;
  c.branching_budget = budget;
  c.worker_count = workers;
  return c;
}

// Plain interval arithmetic through the network: every neuron concretized,
// affine correlation discarded. Strictly coarser than the engine.
std::vector<Interval> naive_interval_ranges(const Network& net,
                                            const Box& box) {
  std::vector<Interval> acts = box.dims;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const bool is_output = l + 1 == net.weights.size();
    std::vector<Interval> next;
    for (std::size_t r = 0; r < net.weights[l].size(); ++r) {
      Rational lo = net.biases[l][r];
      Rational hi = net.biases[l][r];
      for (std::size_t c = 0; c < acts.size(); ++c) {
        const Rational& w = net.weights[l][r][c];
        if (w.sign() >= 0) {
          lo += w * *acts[c].lower;
          hi += w * *acts[c].upper;
        } else {
          lo += w * *acts[c].upper;
          hi += w * *acts[c].lower;
        }
      }
      Interval z = Interval::closed(lo, hi);
      next.push_back(is_output ? z : relu_interval(z));
    }
    acts = std::move(next);
  }
  return acts;
}

// Symbolic interval propagation: linear neurons stay affine over the
// inputs, branching neurons are cut to fresh interval symbols. This is the
// degenerate case the budget-0 engine must match, built without the
// QE/encoding machinery.
std::vector<Interval> symbolic_interval_ranges(const Network& net,
                                               const Box& box) {
  std::map<VarId, Interval> symbols;
  std::vector<AffineExpr> acts;
  for (int i = 0; i < net.input_dim(); ++i) {
    symbols[X(i)] = box.dims[i];
    acts.push_back(AffineExpr::variable(X(i)));
  }
  auto eval = [&](const AffineExpr& e) {
    Rational lo = e.constant();
    Rational hi = e.constant();
    for (const auto& [v, c] : e.terms()) {
      const Interval& iv = symbols.at(v);
      if (c.sign() >= 0) {
        lo += c * *iv.lower;
        hi += c * *iv.upper;
      } else {
        lo += c * *iv.upper;
        hi += c * *iv.lower;
      }
    }
    return Interval::closed(lo, hi);
  };
  std::vector<Interval> out;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const bool is_output = l + 1 == net.weights.size();
    std::vector<AffineExpr> next;
    for (std::size_t r = 0; r < net.weights[l].size(); ++r) {
      AffineExpr z{net.biases[l][r]};
      for (std::size_t c = 0; c < acts.size(); ++c) {
        AffineExpr scaled = acts[c];
        scaled *= net.weights[l][r][c];
        z += scaled;
      }
      Interval range = eval(z);
      if (is_output) {
        out.push_back(range);
        next.push_back(std::move(z));
        continue;
      }
      if (range.lower->sign() >= 0) {
        next.push_back(std::move(z));
      } else if (range.upper->sign() <= 0) {
        next.push_back(AffineExpr{Q(0)});
      } else {
        VarId s = VarId::activation(static_cast<int>(l) + 1,
                                    static_cast<int>(r));
        symbols[s] = relu_interval(range);
        next.push_back(AffineExpr::variable(s));
      }
    }
    acts = std::move(next);
  }
  return out;
}

Box unit_box(int dims) {
  return Box(std::vector<Interval>(dims, Interval::closed(Q(0), Q(1))));
}

}  // namespace

TEST_SUITE_BEGIN("propagation");

TEST_CASE("classify_neuron and the ReLU of an interval") {
  CHECK(classify_neuron(Interval::closed(Q(1, 2), Q(2))) ==
        NeuronStatus::Active);
  CHECK(relu_interval(Interval::closed(Q(1, 2), Q(2))) ==
        Interval::closed(Q(1, 2), Q(2)));

  CHECK(classify_neuron(Interval::closed(Q(-3), Q(-1))) ==
        NeuronStatus::Inactive);
  CHECK(relu_interval(Interval::closed(Q(-3), Q(-1))) ==
        Interval::point(Q(0)));

  CHECK(classify_neuron(Interval::closed(Q(-1), Q(1))) ==
        NeuronStatus::Branching);
  CHECK(relu_interval(Interval::closed(Q(-1), Q(1))) ==
        Interval::closed(Q(0), Q(1)));

  // zero-touching ranges count as linear
  CHECK(classify_neuron(Interval::closed(Q(0), Q(2))) ==
        NeuronStatus::Active);
  CHECK(classify_neuron(Interval::closed(Q(-2), Q(0))) ==
        NeuronStatus::Inactive);
  CHECK(classify_neuron(Interval::point(Q(0))) == NeuronStatus::Active);
}

TEST_CASE("first-layer z-range is the interval of the weighted sum") {
  // z = x0 - x1 over the unit square -> [-1, 1]
  Network net = make_network(
      {2, 1, 1}, {{{Q(1), Q(-1)}}, {{Q(1)}}}, {{Q(0)}, {Q(0)}});
  BehavioralStructure structure(net, unit_box(2), precise_config());
  Interval z = neuron_z_range(structure, {1, 0}, precise_config());
  CHECK(z == Interval::closed(Q(-1), Q(1)));
}

TEST_CASE("diamond net: QE keeps the correlation interval arithmetic loses") {
  Network net = diamond_network();
  Box box({Interval::closed(Q(-1), Q(1))});

  auto precise = propagate(net, box, precise_config());
  CHECK(precise.range.outputs[0] == Interval::closed(Q(0), Q(1)));
  CHECK(precise.range.precise);

  auto naive = naive_interval_ranges(net, box);
  CHECK(naive[0] == Interval::closed(Q(0), Q(2)));

  auto budget0 = propagate(net, box, over_config(0));
  CHECK(budget0.range.outputs[0] == Interval::closed(Q(0), Q(2)));
  CHECK_FALSE(budget0.range.precise);
  CHECK(budget0.range.events.size() == 2);  // both ReLUs concretized
}

TEST_CASE("budget-0 over-approximation equals symbolic interval propagation") {
  Rng rng(20240631);
  for (int trial = 0; trial < 25; ++trial) {
    Network net = random_network(rng, 8);
    Box box = random_box(rng, net.input_dim());
    auto outcome = propagate(net, box, over_config(0));
    auto symbolic = symbolic_interval_ranges(net, box);
    auto naive = naive_interval_ranges(net, box);
    for (int o = 0; o < net.output_dim(); ++o) {
      CHECK(outcome.range.outputs[o] == symbolic[o]);
      CHECK(naive[o].contains(outcome.range.outputs[o]));
    }
  }
}

TEST_CASE("collapse_linear folds active and inactive neurons downstream") {
  // active: z1 = 2x + 1 over [0,1], output 3*a1 -> 6x + 3
  Network active = make_network(
      {1, 1, 1}, {{{Q(2)}}, {{Q(3)}}}, {{Q(1)}, {Q(0)}});
  auto outcome = propagate(active, unit_box(1), precise_config());
  CHECK(outcome.structure.neuron({1, 0}).status == NeuronStatus::Active);
  CHECK(outcome.structure.neuron({1, 0}).collapsed);
  CHECK(outcome.structure.output(0).z_expr ==
        lin({{X(0), Q(6)}}, Q(3)));
  CHECK(outcome.range.outputs[0] == Interval::closed(Q(3), Q(9)));

  // inactive: z' = 3a + x with a == 0 -> z' = x
  Network inactive = make_network(
      {1, 2, 1}, {{{Q(1)}, {Q(1)}}, {{Q(1), Q(3)}}},
      {{Q(0), Q(-5)}, {Q(0)}});
  outcome = propagate(inactive, unit_box(1), precise_config());
  CHECK(outcome.structure.neuron({1, 1}).status == NeuronStatus::Inactive);
  CHECK(outcome.structure.output(0).z_expr == lin({{X(0), Q(1)}}));
  CHECK(outcome.range.outputs[0] == Interval::closed(Q(0), Q(1)));

  // chain of two active neurons composes the affine maps
  Network chain = make_network(
      {1, 1, 1, 1}, {{{Q(2)}}, {{Q(3)}}, {{Q(1)}}},
      {{Q(1)}, {Q(-1)}, {Q(0)}});
  outcome = propagate(chain, unit_box(1), precise_config());
  CHECK(outcome.structure.output(0).z_expr == lin({{X(0), Q(6)}}, Q(2)));
  CHECK(outcome.range.outputs[0] == Interval::closed(Q(2), Q(8)));
}

TEST_CASE("collapse_linear rejects branching neurons") {
  Network net = diamond_network();
  Box box({Interval::closed(Q(-1), Q(1))});
  auto outcome = propagate(net, box, precise_config());
  CHECK(outcome.structure.neuron({1, 0}).status == NeuronStatus::Branching);
  CHECK_THROWS_AS(collapse_linear(outcome.structure, NeuronRef{1, 0}), Error);
}

TEST_CASE("concretize_branching severs correlation and is precise-mode-only") {
  Network net = diamond_network();
  Box box({Interval::closed(Q(-1), Q(1))});

  auto precise = propagate(net, box, precise_config());
  CHECK_THROWS_AS(concretize_branching(precise.structure, NeuronRef{1, 0}),
                  Error);

  // over-approximate with a generous budget: nothing concretized yet
  auto over = propagate(net, box, over_config(8));
  CHECK(over.range.outputs[0] == Interval::closed(Q(0), Q(1)));
  CHECK(over.structure.branching_count() == 2);

  // concretize both by hand and recompute the output range
  BehavioralStructure cut =
      concretize_branching(over.structure, NeuronRef{1, 0});
  cut = concretize_branching(std::move(cut), NeuronRef{1, 1});
  CHECK(cut.branching_count() == 0);
  CHECK_FALSE(cut.precise_so_far());
  Interval severed = variable_range(
      cut.encode(cut.output_expr(0), VarId::output(0), 4096), VarId::output(0));
  CHECK(severed == Interval::closed(Q(0), Q(2)));
}

TEST_CASE("interval atoms of a concretized neuron equal muting when [0,0]") {
  // Solution-set identity behind the degenerate concretization: a pinned
  // a-variable constrains downstream exactly like substituting zero.
  const VarId a = VarId::activation(1, 0);
  Clause pinned;
  pinned.insert_all(interval_atoms(a, Interval::point(Q(0))));
  pinned.insert(Atom(lin({{Y(0), Q(1)}, {a, Q(-3)}, {X(0), Q(-1)}}), Rel::Eq));
  DnfFormula via_interval = eliminate_existential(DnfFormula(pinned), {a});

  Clause muted;
  muted.insert(Atom(lin({{Y(0), Q(1)}, {X(0), Q(-1)}}), Rel::Eq));
  DnfFormula via_subst(muted);

  Rng rng(20240632);
  for (int p = 0; p < 50; ++p) {
    std::map<VarId, Rational> point{{Y(0), rng.rational(5, 2)},
                                    {X(0), rng.rational(5, 2)}};
    CHECK(via_interval.satisfied_by(point) == via_subst.satisfied_by(point));
  }
}

TEST_CASE("propagate on a constant network is a point interval") {
  Network con = constant_network({Q(7), Q(-2)});
  Box box({Interval::closed(Q(-5), Q(5))});
  for (const auto& config : {precise_config(), over_config(0)}) {
    auto outcome = propagate(con, box, config);
    CHECK(outcome.range.outputs[0] == Interval::point(Q(7)));
    CHECK(outcome.range.outputs[1] == Interval::point(Q(-2)));
  }
  CHECK(propagate(con, box, precise_config()).range.precise);
}

TEST_CASE("precise mode matches the activation-pattern oracle exactly") {
  Rng rng(20240633);
  for (int trial = 0; trial < 30; ++trial) {
    Network net = random_network(rng, 10);
    Box box = random_box(rng, net.input_dim());
    auto outcome = propagate(net, box, precise_config());
    REQUIRE(outcome.range.precise);
    auto oracle = pattern_oracle_ranges(net, box);
    for (int o = 0; o < net.output_dim(); ++o) {
      CHECK(outcome.range.outputs[o].lower == oracle[o].lower);
      CHECK(outcome.range.outputs[o].upper == oracle[o].upper);
    }
  }
}

TEST_CASE("sampled evaluations stay inside reported intervals") {
  Rng rng(20240634);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = random_network(rng, 10);
    Box box = random_box(rng, net.input_dim());
    for (const auto& config :
         {precise_config(), over_config(8), over_config(2), over_config(0)}) {
      auto outcome = propagate(net, box, config);
      for (int s = 0; s < 300; ++s) {
        auto x = rng.in_box(box);
        auto y = evaluate_exact(net, x);
        for (int o = 0; o < net.output_dim(); ++o)
          CHECK(outcome.range.outputs[o].contains(y[o]));
      }
    }
  }
}

TEST_CASE("precision ordering: precise inside over inside budget-0") {
  Rng rng(20240635);
  for (int trial = 0; trial < 15; ++trial) {
    Network net = random_network(rng, 10);
    Box box = random_box(rng, net.input_dim());
    auto precise = propagate(net, box, precise_config()).range.outputs;
    auto over = propagate(net, box, over_config(3)).range.outputs;
    auto coarse = propagate(net, box, over_config(0)).range.outputs;
    for (int o = 0; o < net.output_dim(); ++o) {
      CHECK(over[o].contains(precise[o]));
      CHECK(coarse[o].contains(over[o]));
    }
  }
}

TEST_CASE("endpoint attainment: witnesses evaluate onto the bounds") {
  Rng rng(20240636);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Network net = random_network(rng, 8);
    Box box = random_box(rng, net.input_dim());
    auto outcome = propagate(net, box, precise_config());
    const auto& structure = outcome.structure;
    for (int o = 0; o < net.output_dim(); ++o) {
      const Interval& range = outcome.range.outputs[o];
      for (bool low : {true, false}) {
        const auto& end = low ? range.lower : range.upper;
        REQUIRE(end.has_value());
        DnfFormula formula = structure.encode(structure.output_expr(o),
                                              VarId::output(o), 4096);
        Clause pin;
        AffineExpr e = AffineExpr::variable(VarId::output(o));
        e.add_constant(-*end);
        pin.insert(Atom(std::move(e), Rel::Eq));
        auto witness = satisfying_point(formula.conjoin(DnfFormula(pin)));
        REQUIRE(witness.has_value());
        std::vector<Rational> x;
        for (int i = 0; i < net.input_dim(); ++i) x.push_back((*witness)[X(i)]);
        CHECK(evaluate_exact(net, x)[o] == *end);
        ++checked;
      }
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("boundary classification keeps the solution set") {
  // z = x over [0,1] touches zero: Active collapse, same range as oracle
  Network net = relu1_network();
  auto active = propagate(net, unit_box(1), precise_config());
  CHECK(active.structure.neuron({1, 0}).status == NeuronStatus::Active);
  CHECK(active.range.outputs[0] == Interval::closed(Q(0), Q(1)));

  Box negative({Interval::closed(Q(-1), Q(0))});
  auto inactive = propagate(net, negative, precise_config());
  CHECK(inactive.structure.neuron({1, 0}).status == NeuronStatus::Inactive);
  CHECK(inactive.range.outputs[0] == Interval::point(Q(0)));

  auto oracle_a = pattern_oracle_ranges(net, unit_box(1));
  auto oracle_i = pattern_oracle_ranges(net, negative);
  CHECK(active.range.outputs[0] == oracle_a[0]);
  CHECK(inactive.range.outputs[0] == oracle_i[0]);
}

TEST_CASE("results are identical across worker counts") {
  Rng rng(20240637);
  for (int trial = 0; trial < 5; ++trial) {
    Network net = random_network(rng, 10);
    Box box = random_box(rng, net.input_dim());
    auto solo = propagate(net, box, precise_config(1));
    auto pool = propagate(net, box, precise_config(4));
    for (int o = 0; o < net.output_dim(); ++o)
      CHECK(solo.range.outputs[o] == pool.range.outputs[o]);
    CHECK(solo.range.precise == pool.range.precise);
  }
}

TEST_CASE("precise-mode budget failure identifies the blocking neuron") {
  Network net = diamond_network();
  Box box({Interval::closed(Q(-1), Q(1))});
  PropagationConfig starved = precise_config();
  starved.per_neuron_budget.max_clauses = 2;  // output needs 4 branch clauses
  try {
    propagate(net, box, starved);
    FAIL("expected PropagationError");
  } catch (const PropagationError& e) {
    CHECK(e.branching_count == 2);
    CHECK(e.layer == 2);  // the output layer
  }

  PropagationConfig relaxed = over_config(8);
  relaxed.per_neuron_budget.max_clauses = 2;
  auto fallback = propagate(net, box, relaxed);
  CHECK_FALSE(fallback.range.precise);
  CHECK(fallback.range.outputs[0] == Interval::closed(Q(0), Q(2)));
  bool saw_fallback = false;
  for (const auto& e : fallback.range.events)
    saw_fallback =
        saw_fallback || e.kind == BudgetEvent::Kind::IntervalFallback;
  CHECK(saw_fallback);
}

TEST_CASE("progress events stream classification and layer summaries") {
  Network net = diamond_network();
  Box box({Interval::closed(Q(-1), Q(1))});
  PropagationConfig config = precise_config();
  int classified = 0, layers = 0;
  config.progress = [&](const ProgressEvent& e) {
    if (e.kind == ProgressEvent::Kind::NeuronClassified) ++classified;
    if (e.kind == ProgressEvent::Kind::LayerFinished) ++layers;
  };
  propagate(net, box, config);
  CHECK(classified == 2);
  CHECK(layers == 1);
}

TEST_SUITE_END();
