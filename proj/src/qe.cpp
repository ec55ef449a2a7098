// SPDX-License-Identifier: Apache-2.0

#include "qenet/qe.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace qenet {

namespace {

using Clock = std::chrono::steady_clock;

// Interleaved implication-based pruning is only worth its cost once a
// clause has accumulated a few atoms.
constexpr std::size_t kRedundancyThreshold = 5;

struct BudgetContext {
  explicit BudgetContext(const EliminationBudget& b) : budget(b) {
    start = Clock::now();
    if (b.deadline)
      deadline = start + std::chrono::duration_cast<Clock::duration>(
                             *b.deadline);
  }

  void check_deadline() {
    if (deadline && Clock::now() > *deadline) {
      finish();
      throw BudgetError(BudgetError::Kind::Timeout,
                        "elimination deadline exceeded", stats);
    }
  }

  void note_clauses(std::size_t produced) {
    stats.clauses_produced += produced;
  }

  void check_clause_count(std::size_t count) {
    if (count > budget.max_clauses) {
      finish();
      throw BudgetError(BudgetError::Kind::Blowup,
                        "clause budget exceeded (" + std::to_string(count) +
                            " > " + std::to_string(budget.max_clauses) + ")",
                        stats);
    }
  }

  void finish() {
    stats.seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
  }

  const EliminationBudget& budget;
  Clock::time_point start;
  std::optional<Clock::time_point> deadline;
  EliminationStats stats;
};

// Decomposition of an atom with respect to one variable:
//   coeff * var + rest  rel  0
struct VarSplit {
  Rational coeff;
  AffineExpr rest;
};

VarSplit split_on(const Atom& atom, VarId var) {
  VarSplit s;
  s.coeff = atom.expr().coeff(var);
  s.rest = atom.expr();
  s.rest.add_term(var, -s.coeff);
  return s;
}

// Elimination cost estimate: an equality on the variable means free
// substitution, otherwise the Fourier-Motzkin pair product.
long elimination_cost(const Clause& clause, VarId var) {
  long lowers = 0, uppers = 0;
  for (const auto& atom : clause.atoms()) {
    Rational c = atom.expr().coeff(var);
    if (c.is_zero()) continue;
    if (atom.rel() == Rel::Eq) return -1;
    (c.sign() > 0 ? uppers : lowers)++;
  }
  return lowers * uppers;
}

VarId pick_elimination_var(const Clause& clause,
                           const std::set<VarId>& candidates) {
  VarId best{};
  long best_cost = std::numeric_limits<long>::max();
  bool found = false;
  for (VarId v : candidates) {
    if (!clause.mentions(v)) continue;
    long cost = elimination_cost(clause, v);
    if (!found || cost < best_cost) {
      best = v;
      best_cost = cost;
      found = true;
    }
  }
  if (!found) best = *candidates.begin();  // absent vars eliminate trivially
  return best;
}

// Satisfiability by exhaustive elimination, bound-combining pruning only
// (no implication tests, so remove_redundant can call this freely).
bool satisfiable_by_elimination(Clause clause) {
  clause.simplify();
  while (!clause.is_false()) {
    auto vars = clause.free_vars();
    if (vars.empty()) return true;
    VarId v = pick_elimination_var(clause, vars);
    clause = fm_eliminate_var(clause, v, static_cast<std::size_t>(-1));
  }
  return false;
}

Clause prune_implied(Clause clause, EliminationStats* stats) {
  if (clause.is_false() || clause.size() < 2) return clause;
  // Later atoms (complex exprs sort high) are the usual FM byproducts; try
  // them first.
  for (std::size_t pos = clause.size(); pos-- > 0;) {
    if (pos >= clause.size()) pos = clause.size() - 1;
    const Atom& candidate = clause.atoms()[pos];
    if (candidate.rel() == Rel::Eq) continue;
    Clause rest;
    for (std::size_t i = 0; i < clause.size(); ++i)
      if (i != pos) rest.insert(clause.atoms()[i]);
    Clause test = rest;
    for (const auto& neg : candidate.negation()) test.insert(neg);
    if (!satisfiable_by_elimination(test)) {
      clause = std::move(rest);
      if (stats) stats->atoms_pruned++;
    }
  }
  return clause;
}

Clause eliminate_from_clause(Clause clause, std::set<VarId> remaining,
                             BudgetContext& ctx) {
  while (!clause.is_false()) {
    for (auto it = remaining.begin(); it != remaining.end();)
      it = clause.mentions(*it) ? std::next(it) : remaining.erase(it);
    if (remaining.empty()) break;
    ctx.check_deadline();
    VarId v = pick_elimination_var(clause, remaining);
    remaining.erase(v);
    clause = fm_eliminate_var(clause, v, ctx.budget.max_atoms_per_clause);
    ctx.stats.eliminations++;
    if (clause.size() >= kRedundancyThreshold)
      clause = prune_implied(std::move(clause), &ctx.stats);
  }
  return clause;
}

Interval interval_from_bound_atom(const Atom& atom, VarId var) {
  VarSplit s = split_on(atom, var);
  if (!s.rest.is_constant())
    throw Error("residual atom mentions more than the target variable: " +
                atom.to_string());
  Rational bound = -s.rest.constant() / s.coeff;
  if (atom.rel() == Rel::Eq) return Interval::point(std::move(bound));
  bool strict = atom.rel() == Rel::Lt;
  if (s.coeff.sign() > 0)  // var <= bound
    return Interval(std::nullopt, std::move(bound), false, strict);
  return Interval(std::move(bound), std::nullopt, strict, false);
}

// One-variable DNF as a sorted union of disjoint maximal intervals.
std::vector<Interval> interval_union(const DnfFormula& formula, VarId var) {
  std::vector<Interval> parts;
  for (const auto& clause : formula.clauses()) {
    auto iv = clause_var_interval(clause, var);
    if (iv) parts.push_back(*iv);
  }
  std::sort(parts.begin(), parts.end(), [](const Interval& a,
                                           const Interval& b) {
    if (!a.lower && b.lower) return true;
    if (a.lower && !b.lower) return false;
    if (a.lower && b.lower && *a.lower != *b.lower) return *a.lower < *b.lower;
    if (a.lower && b.lower && a.lower_open != b.lower_open)
      return !a.lower_open;
    if (!a.upper || !b.upper) return !b.upper && a.upper;
    if (*a.upper != *b.upper) return *a.upper < *b.upper;
    return b.upper_open && !a.upper_open;
  });

  std::vector<Interval> merged;
  for (const auto& p : parts) {
    if (merged.empty()) {
      merged.push_back(p);
      continue;
    }
    Interval& last = merged.back();
    bool connected;
    if (!last.upper || !p.lower) {
      connected = true;
    } else if (*p.lower < *last.upper) {
      connected = true;
    } else if (*p.lower == *last.upper) {
      connected = !(last.upper_open && p.lower_open);
    } else {
      connected = false;
    }
    if (!connected) {
      merged.push_back(p);
      continue;
    }
    // extend the upper end if p reaches further
    if (!p.upper) {
      last.upper.reset();
      last.upper_open = false;
    } else if (last.upper &&
               (*p.upper > *last.upper ||
                (*p.upper == *last.upper && !p.upper_open))) {
      last.upper = p.upper;
      last.upper_open = p.upper_open;
    }
  }
  return merged;
}

// Complement of a disjoint sorted interval union, as a one-variable DNF.
DnfFormula complement_union(const std::vector<Interval>& parts, VarId var) {
  if (parts.empty()) return DnfFormula::always_true();
  DnfFormula result;
  auto add_piece = [&](std::optional<Rational> lo, bool lo_open,
                       std::optional<Rational> hi, bool hi_open) {
    Clause c;
    c.insert_all(interval_atoms(var, Interval(std::move(lo), std::move(hi),
                                              lo_open, hi_open)));
    c.simplify();
    result.add_clause(std::move(c));
  };
  if (parts.front().lower)
    add_piece(std::nullopt, false, *parts.front().lower,
              !parts.front().lower_open);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    add_piece(*parts[i].upper, !parts[i].upper_open, *parts[i + 1].lower,
              !parts[i + 1].lower_open);
  if (parts.back().upper)
    add_piece(*parts.back().upper, !parts.back().upper_open, std::nullopt,
              false);
  result.normalize();
  return result;
}

}  // namespace

Clause fm_eliminate_var(const Clause& clause, VarId var,
                        std::size_t max_atoms) {
  if (clause.is_false()) return Clause::contradiction();
  if (!clause.mentions(var)) return clause;

  // Gaussian substitution if an equality pins the variable.
  for (const auto& atom : clause.atoms()) {
    if (atom.rel() != Rel::Eq) continue;
    VarSplit s = split_on(atom, var);
    if (s.coeff.is_zero()) continue;
    AffineExpr replacement = s.rest * (-s.coeff.reciprocal());
    Clause result;
    for (const auto& other : clause.atoms()) {
      if (&other == &atom) continue;
      result.insert(Atom(other.expr().substitute(var, replacement),
                         other.rel()));
      if (result.is_false()) return result;
    }
    result.simplify();
    return result;
  }

  Clause result;
  std::vector<std::pair<VarSplit, bool>> lowers, uppers;  // (split, strict)
  for (const auto& atom : clause.atoms()) {
    VarSplit s = split_on(atom, var);
    if (s.coeff.is_zero()) {
      result.insert(atom);
      continue;
    }
    bool strict = atom.rel() == Rel::Lt;
    if (s.coeff.sign() > 0)
      uppers.emplace_back(std::move(s), strict);
    else
      lowers.emplace_back(std::move(s), strict);
  }
  if (result.size() + lowers.size() * uppers.size() > max_atoms)
    throw BudgetError(BudgetError::Kind::Blowup,
                      "atom budget exceeded eliminating " + var.name());
  for (const auto& [lo, lo_strict] : lowers) {
    for (const auto& [up, up_strict] : uppers) {
      // combine coeff_lo*var + rest_lo (<|<=) 0 with coeff_up*var + rest_up
      AffineExpr combined = lo.rest * up.coeff - up.rest * lo.coeff;
      result.insert(
          Atom(std::move(combined), lo_strict || up_strict ? Rel::Lt : Rel::Le));
      if (result.is_false()) return result;
    }
  }
  result.simplify();
  return result;
}

Clause remove_redundant(const Clause& clause) {
  Clause c = clause;
  c.simplify();
  return prune_implied(std::move(c), nullptr);
}

bool clause_satisfiable(const Clause& clause) {
  return satisfiable_by_elimination(clause);
}

DnfFormula eliminate_existential(const DnfFormula& formula,
                                 const std::vector<VarId>& vars,
                                 const EliminationBudget& budget,
                                 EliminationStats* stats) {
  BudgetContext ctx(budget);
  std::set<VarId> var_set(vars.begin(), vars.end());
  DnfFormula result;
  try {
    for (const auto& clause : formula.clauses()) {
      ctx.check_deadline();
      Clause projected = eliminate_from_clause(clause, var_set, ctx);
      if (projected.is_false()) continue;
      result.add_clause(std::move(projected));
      ctx.note_clauses(1);
      ctx.check_clause_count(result.size());
    }
  } catch (BudgetError&) {
    if (stats) {
      ctx.finish();
      *stats += ctx.stats;
    }
    throw;
  }
  result.normalize(true);
  ctx.finish();
  if (stats) *stats += ctx.stats;
  return result;
}

std::optional<Interval> clause_var_interval(const Clause& clause, VarId var) {
  if (clause.is_false()) return std::nullopt;
  Interval iv = Interval::unbounded();
  for (const auto& atom : clause.atoms()) {
    auto next = Interval::intersect(iv, interval_from_bound_atom(atom, var));
    if (!next) return std::nullopt;
    iv = *next;
  }
  return iv;
}

Interval variable_range(const DnfFormula& formula, VarId var,
                        const EliminationBudget& budget,
                        EliminationStats* stats) {
  auto free = formula.free_vars();
  free.erase(var);
  DnfFormula residual = eliminate_existential(
      formula, std::vector<VarId>(free.begin(), free.end()), budget, stats);

  std::optional<Interval> hull;
  for (const auto& clause : residual.clauses()) {
    auto iv = clause_var_interval(clause, var);
    if (!iv) continue;
    hull = hull ? Interval::hull(*hull, *iv) : *iv;
  }
  if (!hull)
    throw EmptyRangeError("range of " + var.name() +
                          " over an unsatisfiable formula");
  return *hull;
}

DnfFormula eliminate_universal_implication(const DnfFormula& antecedent,
                                           const DnfFormula& consequent,
                                           const std::vector<VarId>& quantified,
                                           const EliminationBudget& budget,
                                           EliminationStats* stats) {
  BudgetContext ctx(budget);
  DnfFormula neg_consequent =
      negate_formula(consequent, budget.max_clauses);
  ctx.check_clause_count(antecedent.size() * std::max<std::size_t>(
                                                  neg_consequent.size(), 1));
  DnfFormula violation = antecedent.conjoin(neg_consequent);
  ctx.note_clauses(violation.size());
  ctx.check_clause_count(violation.size());
  ctx.finish();
  if (stats) *stats += ctx.stats;

  DnfFormula projected =
      eliminate_existential(violation, quantified, budget, stats);

  if (projected.is_false()) return DnfFormula::always_true();
  if (projected.is_true()) return DnfFormula::always_false();
  auto free = projected.free_vars();
  if (free.size() == 1) {
    VarId v = *free.begin();
    return complement_union(interval_union(projected, v), v);
  }
  return negate_formula(projected, budget.max_clauses);
}

std::optional<std::map<VarId, Rational>> satisfying_point(
    const DnfFormula& formula, const EliminationBudget& budget) {
  auto all_vars = formula.free_vars();
  for (const auto& clause : formula.clauses()) {
    if (clause.is_false() || !clause_satisfiable(clause)) continue;
    std::map<VarId, Rational> point;
    Clause work = clause;
    bool ok = true;
    while (ok) {
      auto vars = work.free_vars();
      if (vars.empty()) break;
      VarId v = *vars.begin();
      Interval iv;
      try {
        iv = variable_range(DnfFormula(work), v, budget);
      } catch (const EmptyRangeError&) {
        ok = false;
        break;
      }
      Rational value;
      if (iv.is_point())
        value = *iv.lower;
      else if (iv.bounded())
        value = iv.midpoint();
      else if (iv.lower)
        value = *iv.lower + Rational(1);
      else if (iv.upper)
        value = *iv.upper - Rational(1);
      else
        value = Rational(0);
      point.emplace(v, value);
      work = work.substituted(v, value);
      if (work.is_false()) ok = false;
    }
    if (!ok) continue;
    for (VarId v : all_vars) point.try_emplace(v, Rational(0));
    return point;
  }
  return std::nullopt;
}

}  // namespace qenet
