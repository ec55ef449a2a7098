// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace qenet;
using namespace qenet::testing;

namespace {

Atom le(AffineExpr e) { return Atom(std::move(e), Rel::Le); }
Atom lt(AffineExpr e) { return Atom(std::move(e), Rel::Lt); }
Atom eq(AffineExpr e) { return Atom(std::move(e), Rel::Eq); }

// Random conjunction over the given variables.
Clause random_clause(Rng& rng, int vars, int max_atoms) {
  Clause clause;
  const int atoms = static_cast<int>(rng.integer(1, max_atoms));
  for (int a = 0; a < atoms; ++a) {
    AffineExpr e;
    for (int v = 0; v < vars; ++v) e.add_term(X(v), rng.rational(3, 2));
    e.add_constant(rng.rational(2, 2));
    if (e.is_constant()) continue;
    long kind = rng.integer(0, 9);
    Rel rel = kind < 7 ? Rel::Le : (kind < 9 ? Rel::Lt : Rel::Eq);
    clause.insert(Atom(std::move(e), rel));
  }
  return clause;
}

DnfFormula random_formula(Rng& rng, int vars, int max_clauses, int max_atoms) {
  DnfFormula f;
  const int clauses = static_cast<int>(rng.integer(1, max_clauses));
  for (int c = 0; c < clauses; ++c) f.add_clause(random_clause(rng, vars, max_atoms));
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("qe-engine");

TEST_CASE("fm_eliminate_var pairs lower and upper bounds") {
  // {x >= y - 1, x <= 2, x <= y} eliminate x -> {y <= 3}
  Clause c;
  c.insert(le(lin({{X(1), Q(1)}, {X(0), Q(-1)}}, Q(-1))));  // y - 1 - x <= 0
  c.insert(le(lin({{X(0), Q(1)}}, Q(-2))));                 // x - 2 <= 0
  c.insert(le(lin({{X(0), Q(1)}, {X(1), Q(-1)}})));         // x - y <= 0
  Clause out = fm_eliminate_var(c, X(0));
  REQUIRE(out.size() == 1);
  CHECK(out.atoms()[0] == le(lin({{X(1), Q(1)}}, Q(-3))));
}

TEST_CASE("fm_eliminate_var substitutes equalities") {
  // {x = 2u + 1, x <= 3} eliminate x -> {2u + 1 <= 3}
  Clause c;
  c.insert(eq(lin({{X(0), Q(1)}, {X(1), Q(-2)}}, Q(-1))));
  c.insert(le(lin({{X(0), Q(1)}}, Q(-3))));
  Clause out = fm_eliminate_var(c, X(0));
  REQUIRE(out.size() == 1);
  CHECK(out.atoms()[0] == le(lin({{X(1), Q(1)}}, Q(-1))));  // u <= 1
}

TEST_CASE("fm_eliminate_var ignores absent variables") {
  Clause c;
  c.insert(le(lin({{X(1), Q(1)}}, Q(-5))));
  CHECK(fm_eliminate_var(c, X(0)) == c);
}

TEST_CASE("fm_eliminate_var preserves satisfiability") {
  Rng rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    Clause c = random_clause(rng, 3, 6);
    bool before = clause_satisfiable(c);
    Clause after = fm_eliminate_var(c, X(static_cast<int>(rng.integer(0, 2))));
    CHECK(clause_satisfiable(after) == before);
  }
}

TEST_CASE("fm_eliminate_var reports blowup against the atom budget") {
  Clause c;
  // 5 lower and 5 upper bounds with incomparable slopes
  for (int k = 1; k <= 5; ++k) {
    c.insert(le(lin({{X(0), Q(-1)}, {X(1), Q(k)}}, Q(-k))));
    c.insert(le(lin({{X(0), Q(1)}, {X(1), Q(2 * k + 1)}}, Q(k))));
  }
  CHECK_THROWS_AS(fm_eliminate_var(c, X(0), 10), BudgetError);
}

TEST_CASE("remove_redundant drops implied atoms only") {
  Clause dominated;
  dominated.insert(le(lin({{X(0), Q(1)}}, Q(-1))));  // x <= 1
  dominated.insert(le(lin({{X(0), Q(1)}}, Q(-2))));  // x <= 2
  Clause pruned = remove_redundant(dominated);
  REQUIRE(pruned.size() == 1);
  CHECK(pruned.atoms()[0] == le(lin({{X(0), Q(1)}}, Q(-1))));

  Clause sum;  // {x <= 1, y <= 1, x + y <= 3} -> {x <= 1, y <= 1}
  sum.insert(le(lin({{X(0), Q(1)}}, Q(-1))));
  sum.insert(le(lin({{X(1), Q(1)}}, Q(-1))));
  sum.insert(le(lin({{X(0), Q(1)}, {X(1), Q(1)}}, Q(-3))));
  pruned = remove_redundant(sum);
  CHECK(pruned.size() == 2);
  for (const auto& atom : pruned.atoms())
    CHECK(atom.expr().term_count() == 1);

  Clause independent;  // {x <= 1, y <= x} unchanged
  independent.insert(le(lin({{X(0), Q(1)}}, Q(-1))));
  independent.insert(le(lin({{X(1), Q(1)}, {X(0), Q(-1)}})));
  CHECK(remove_redundant(independent) == independent);
}

TEST_CASE("remove_redundant preserves the solution set") {
  Rng rng(20240612);
  int removed_any = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Clause c = random_clause(rng, 3, 7);
    Clause pruned = remove_redundant(c);
    if (pruned.size() < c.size()) ++removed_any;
    for (int p = 0; p < 10; ++p) {
      std::map<VarId, Rational> point;
      for (int v = 0; v < 3; ++v) point[X(v)] = rng.rational(6, 3);
      CHECK(c.satisfied_by(point) == pruned.satisfied_by(point));
    }
  }
  CHECK(removed_any > 0);
}

TEST_CASE("eliminate_existential on the hand cases") {
  // (x >= 0 and y = 2x + 1) eliminate x -> y >= 1
  Clause c;
  c.insert(le(lin({{X(0), Q(-1)}})));
  c.insert(eq(lin({{Y(0), Q(1)}, {X(0), Q(-2)}}, Q(-1))));
  DnfFormula out = eliminate_existential(DnfFormula(c), {X(0)});
  REQUIRE(out.size() == 1);
  REQUIRE(out.clauses()[0].size() == 1);
  CHECK(out.clauses()[0].atoms()[0] == le(lin({{Y(0), Q(-1)}}, Q(1))));

  // ReLU of x on [-1, 1]: project onto a
  const VarId a = VarId::activation(1, 0);
  Clause pos;
  pos.insert(eq(lin({{a, Q(1)}, {X(0), Q(-1)}})));
  pos.insert(le(lin({{X(0), Q(-1)}})));
  pos.insert(le(lin({{X(0), Q(1)}}, Q(-1))));
  Clause zero;
  zero.insert(eq(lin({{a, Q(1)}})));
  zero.insert(le(lin({{X(0), Q(-1)}}, Q(-1))));
  zero.insert(le(lin({{X(0), Q(1)}})));
  DnfFormula relu({pos, zero});
  DnfFormula projected = eliminate_existential(relu, {X(0)});
  // solution set must be exactly [0, 1]
  for (long k = -8; k <= 12; ++k) {
    Rational v(k, 8);
    bool inside = v >= Q(0) && v <= Q(1);
    CHECK(projected.satisfied_by({{a, v}}) == inside);
  }

  // TRUE stays TRUE
  CHECK(eliminate_existential(DnfFormula::always_true(), {X(0)}).is_true());
}

TEST_CASE("eliminate_existential agrees with sampling both ways") {
  Rng rng(20240613);
  for (int trial = 0; trial < 120; ++trial) {
    const int vars = static_cast<int>(rng.integer(2, 4));
    DnfFormula f = random_formula(rng, vars, 3, 6);
    const int eliminated = static_cast<int>(rng.integer(1, vars - 1));
    std::vector<VarId> quantified;
    for (int v = 0; v < eliminated; ++v) quantified.push_back(X(v));
    DnfFormula projected = eliminate_existential(f, quantified);

    // soundness: projections of satisfying points satisfy the result
    for (int p = 0; p < 30; ++p) {
      std::map<VarId, Rational> point;
      for (int v = 0; v < vars; ++v) point[X(v)] = rng.rational(6, 2);
      if (!f.satisfied_by(point)) continue;
      std::map<VarId, Rational> shadow;
      for (int v = eliminated; v < vars; ++v) shadow[X(v)] = point[X(v)];
      CHECK(projected.satisfied_by(shadow));
    }
    // completeness: points of the projection extend to the original
    for (int p = 0; p < 30; ++p) {
      std::map<VarId, Rational> shadow;
      for (int v = eliminated; v < vars; ++v) shadow[X(v)] = rng.rational(6, 2);
      if (!projected.satisfied_by(shadow)) continue;
      bool extends = false;
      for (const auto& clause : f.clauses()) {
        Clause pinned = clause;
        for (const auto& [v, val] : shadow) pinned = pinned.substituted(v, val);
        if (!pinned.is_false() && clause_satisfiable(pinned)) {
          extends = true;
          break;
        }
      }
      CHECK(extends);
    }
  }
}

TEST_CASE("elimination order does not change the solution set") {
  Rng rng(20240614);
  for (int trial = 0; trial < 60; ++trial) {
    DnfFormula f = random_formula(rng, 4, 3, 5);
    std::vector<VarId> order_a{X(0), X(1)};
    std::vector<VarId> order_b{X(1), X(0)};
    DnfFormula pa = eliminate_existential(f, order_a);
    DnfFormula pb = eliminate_existential(f, order_b);
    for (int p = 0; p < 40; ++p) {
      std::map<VarId, Rational> point{{X(2), rng.rational(6, 2)},
                                      {X(3), rng.rational(6, 2)}};
      CHECK(pa.satisfied_by(point) == pb.satisfied_by(point));
    }
  }
}

TEST_CASE("variable_range on the hand cases") {
  // ((y = 2x and 0 <= x <= 1) or (y = -x and 0 <= x <= 1)) -> y in [-1, 2]
  Clause up, down;
  up.insert(eq(lin({{Y(0), Q(1)}, {X(0), Q(-2)}})));
  up.insert(le(lin({{X(0), Q(-1)}})));
  up.insert(le(lin({{X(0), Q(1)}}, Q(-1))));
  down.insert(eq(lin({{Y(0), Q(1)}, {X(0), Q(1)}})));
  down.insert(le(lin({{X(0), Q(-1)}})));
  down.insert(le(lin({{X(0), Q(1)}}, Q(-1))));
  Interval range = variable_range(DnfFormula({up, down}), Y(0));
  CHECK(range == Interval::closed(Q(-1), Q(2)));

  // point range
  Clause point;
  point.insert(eq(lin({{Y(0), Q(1)}}, Q(-7))));
  CHECK(variable_range(DnfFormula(point), Y(0)) == Interval::point(Q(7)));

  // unsatisfiable -> EmptyRangeError
  Clause dead;
  dead.insert(le(lin({{Y(0), Q(1)}}, Q(-1))));
  dead.insert(le(lin({{Y(0), Q(-1)}}, Q(2))));
  CHECK_THROWS_AS(variable_range(DnfFormula(dead), Y(0)), EmptyRangeError);
}

TEST_CASE("variable_range endpoints are attained") {
  Rng rng(20240615);
  int bounded_cases = 0;
  for (int trial = 0; trial < 80; ++trial) {
    DnfFormula f = random_formula(rng, 3, 3, 5);
    // keep the target bounded so endpoints exist
    Clause bounds;
    bounds.insert(le(lin({{X(0), Q(1)}}, Q(-4))));
    bounds.insert(le(lin({{X(0), Q(-1)}}, Q(-4))));
    f = f.conjoin(DnfFormula(bounds));
    Interval range;
    try {
      range = variable_range(f, X(0));
    } catch (const EmptyRangeError&) {
      continue;
    }
    ++bounded_cases;
    for (bool low : {true, false}) {
      const auto& end = low ? range.lower : range.upper;
      const bool open = low ? range.lower_open : range.upper_open;
      if (!end || open) continue;
      bool attained = false;
      for (const auto& clause : f.clauses()) {
        Clause pinned = clause.substituted(X(0), *end);
        if (!pinned.is_false() && clause_satisfiable(pinned)) {
          attained = true;
          break;
        }
      }
      CHECK(attained);
    }
  }
  CHECK(bounded_cases > 20);
}

TEST_CASE("eliminate_universal_implication on the hand cases") {
  const VarId d = VarId::perturbation();
  const VarId x = X(0);

  // forall x: |x| <= delta  =>  |2x| <= 2 delta   (TRUE)
  Clause ball;
  ball.insert(le(lin({{x, Q(1)}, {d, Q(-1)}})));   // x - d <= 0
  ball.insert(le(lin({{x, Q(-1)}, {d, Q(-1)}})));  // -x - d <= 0
  Clause firm;
  firm.insert(le(lin({{x, Q(2)}, {d, Q(-2)}})));
  firm.insert(le(lin({{x, Q(-2)}, {d, Q(-2)}})));
  DnfFormula identity = eliminate_universal_implication(
      DnfFormula(ball), DnfFormula(firm), {x});
  CHECK(identity.is_true());

  // forall x: (|x| <= delta and delta >= 0) => 2x <= 1   gives delta <= 1/2
  Clause ante = ball;
  ante.insert(le(lin({{d, Q(-1)}})));  // delta >= 0
  Clause cons;
  cons.insert(le(lin({{x, Q(2)}}, Q(-1))));
  DnfFormula residual = eliminate_universal_implication(
      DnfFormula(ante), DnfFormula(cons), {x});
  Clause side;
  side.insert(le(lin({{d, Q(-1)}})));
  Interval feasible =
      variable_range(residual.conjoin(DnfFormula(side)), d);
  CHECK(*feasible.upper == Q(1, 2));
}

TEST_CASE("eliminate_universal_implication agrees with the grid") {
  // 1 quantified variable, coefficients in [-2, 2], constants in halves:
  // every critical point lies on the 1/32 grid, so the scan is exact.
  Rng rng(20240616);
  const VarId x = X(0);
  const VarId d = VarId::perturbation();
  for (int trial = 0; trial < 60; ++trial) {
    Clause ante;
    ante.insert(le(lin({{x, Q(1)}}, Q(-2))));   // x <= 2
    ante.insert(le(lin({{x, Q(-1)}}, Q(-2))));  // x >= -2
    const int extra = static_cast<int>(rng.integer(1, 3));
    for (int a = 0; a < extra; ++a) {
      AffineExpr e;
      e.add_term(x, Rational(rng.integer(-2, 2)));
      e.add_term(d, Rational(rng.integer(-2, 2)));
      e.add_constant(Rational(rng.integer(-4, 4), 2));
      if (e.is_constant()) continue;
      ante.insert(le(std::move(e)));
    }
    Clause cons;
    AffineExpr target;
    target.add_term(x, Rational(rng.integer(-2, 2)));
    target.add_term(d, Rational(rng.integer(-2, 2)));
    target.add_constant(Rational(rng.integer(-4, 4), 2));
    if (target.is_constant()) continue;
    cons.insert(le(std::move(target)));

    DnfFormula result = eliminate_universal_implication(
        DnfFormula(ante), DnfFormula(cons), {x});

    for (long k = -16; k <= 16; ++k) {
      std::map<VarId, Rational> at{{d, Rational(k, 8)}};
      bool brute = grid_implication_holds(DnfFormula(ante), DnfFormula(cons),
                                          {x}, at, 3, 32);
      CHECK(result.satisfied_by(at) == brute);
    }
  }
}

TEST_CASE("budgets abort instead of answering") {
  Rng rng(20240617);
  DnfFormula f = random_formula(rng, 3, 3, 6);
  EliminationBudget tiny;
  tiny.deadline = std::chrono::duration<double>(-1.0);
  CHECK_THROWS_AS(eliminate_existential(f, {X(0)}, tiny), BudgetError);

  EliminationBudget one_clause;
  one_clause.max_clauses = 1;
  DnfFormula wide = random_formula(rng, 3, 3, 4);
  while (wide.size() < 2) wide = random_formula(rng, 3, 3, 4);
  CHECK_THROWS_AS(eliminate_existential(wide, {X(0)}, one_clause),
                  BudgetError);
}

TEST_CASE("satisfying_point finds points inside the solution set") {
  Rng rng(20240618);
  int found = 0;
  for (int trial = 0; trial < 60; ++trial) {
    DnfFormula f = random_formula(rng, 3, 3, 5);
    auto point = satisfying_point(f);
    bool any_sat = false;
    for (const auto& clause : f.clauses())
      any_sat = any_sat || clause_satisfiable(clause);
    CHECK(point.has_value() == any_sat);
    if (point) {
      CHECK(f.satisfied_by(*point));
      ++found;
    }
  }
  CHECK(found > 20);
}

TEST_SUITE_END();
