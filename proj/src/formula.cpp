// SPDX-License-Identifier: Apache-2.0

#include "qenet/formula.hpp"

#include <algorithm>
#include <map>

namespace qenet {

// ---------------------------------------------------------------------------
// Atom

Atom::Atom(AffineExpr expr, Rel rel) : expr_(std::move(expr)), rel_(rel) {
  if (expr_.is_constant()) return;
  Rational lead = expr_.coeff(expr_.leading_var());
  Rational scale = lead.abs().reciprocal();
  if (rel_ == Rel::Eq && lead.sign() < 0) scale = -scale;
  if (scale != Rational(1)) expr_ *= scale;
}

bool Atom::ground_truth() const {
  const Rational& c = expr_.constant();
  switch (rel_) {
    case Rel::Le: return c.sign() <= 0;
    case Rel::Lt: return c.sign() < 0;
    case Rel::Eq: return c.is_zero();
  }
  return false;
}

std::vector<Atom> Atom::negation() const {
  switch (rel_) {
    case Rel::Le: return {Atom(-expr_, Rel::Lt)};
    case Rel::Lt: return {Atom(-expr_, Rel::Le)};
    case Rel::Eq: return {Atom(expr_, Rel::Lt), Atom(-expr_, Rel::Lt)};
  }
  return {};
}

bool Atom::satisfied_by(const std::map<VarId, Rational>& point) const {
  Rational v = expr_.evaluate(point);
  switch (rel_) {
    case Rel::Le: return v.sign() <= 0;
    case Rel::Lt: return v.sign() < 0;
    case Rel::Eq: return v.is_zero();
  }
  return false;
}

std::string Atom::to_string() const {
  std::string op;
  switch (rel_) {
    case Rel::Le: op = " <= 0"; break;
    case Rel::Lt: op = " < 0"; break;
    case Rel::Eq: op = " = 0"; break;
  }
  return expr_.to_string() + op;
}

// ---------------------------------------------------------------------------
// Clause

Clause::Clause(std::vector<Atom> atoms) {
  for (auto& a : atoms) insert(std::move(a));
}

Clause Clause::contradiction() {
  Clause c;
  c.contradictory_ = true;
  return c;
}

void Clause::insert(Atom atom) {
  if (contradictory_) return;
  if (atom.is_ground()) {
    if (!atom.ground_truth()) {
      atoms_.clear();
      contradictory_ = true;
    }
    return;
  }
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it != atoms_.end() && *it == atom) return;
  atoms_.insert(it, std::move(atom));
}

void Clause::insert_all(const std::vector<Atom>& atoms) {
  for (const auto& a : atoms) insert(a);
}

std::set<VarId> Clause::free_vars() const {
  std::set<VarId> vars;
  for (const auto& a : atoms_)
    for (const auto& [v, c] : a.expr().terms()) vars.insert(v);
  return vars;
}

bool Clause::mentions(VarId v) const {
  for (const auto& a : atoms_)
    if (a.expr().mentions(v)) return true;
  return false;
}

namespace {

// Bounds accumulated for one direction (a variable-part expression with
// leading coefficient +1).
struct DirectionBounds {
  std::optional<Rational> lower, upper, eq;
  bool lower_strict = false, upper_strict = false;
};

}  // namespace

std::size_t Clause::simplify() {
  if (contradictory_ || atoms_.empty()) return 0;
  const std::size_t before = atoms_.size();

  std::map<AffineExpr, DirectionBounds> buckets;
  for (const auto& atom : atoms_) {
    AffineExpr var_part = atom.expr();
    Rational k = var_part.constant();
    var_part.add_constant(-k);
    const bool flipped = var_part.coeff(var_part.leading_var()).sign() < 0;
    if (flipped) var_part = -var_part;
    DirectionBounds& b = buckets[var_part];

    // atom: sign * t + k rel 0, where t is the oriented variable part
    if (atom.rel() == Rel::Eq) {
      Rational value = flipped ? k : -k;
      if (b.eq && *b.eq != value) {
        *this = contradiction();
        return before;
      }
      b.eq = value;
    } else {
      const bool strict = atom.rel() == Rel::Lt;
      if (!flipped) {  // t <= -k (upper bound)
        Rational value = -k;
        if (!b.upper || value < *b.upper) {
          b.upper = value;
          b.upper_strict = strict;
        } else if (value == *b.upper && strict) {
          b.upper_strict = true;
        }
      } else {  // t >= k (lower bound)
        Rational value = k;
        if (!b.lower || value > *b.lower) {
          b.lower = value;
          b.lower_strict = strict;
        } else if (value == *b.lower && strict) {
          b.lower_strict = true;
        }
      }
    }
  }

  std::vector<Atom> rebuilt;
  rebuilt.reserve(atoms_.size());
  for (auto& [dir, b] : buckets) {
    if (b.eq) {
      if (b.lower &&
          (*b.lower > *b.eq || (*b.lower == *b.eq && b.lower_strict))) {
        *this = contradiction();
        return before;
      }
      if (b.upper &&
          (*b.upper < *b.eq || (*b.upper == *b.eq && b.upper_strict))) {
        *this = contradiction();
        return before;
      }
      AffineExpr e = dir;
      e.add_constant(-*b.eq);
      rebuilt.emplace_back(std::move(e), Rel::Eq);
      continue;
    }
    if (b.lower && b.upper) {
      if (*b.lower > *b.upper ||
          (*b.lower == *b.upper && (b.lower_strict || b.upper_strict))) {
        *this = contradiction();
        return before;
      }
      if (*b.lower == *b.upper) {
        AffineExpr e = dir;
        e.add_constant(-*b.lower);
        rebuilt.emplace_back(std::move(e), Rel::Eq);
        continue;
      }
    }
    if (b.upper) {
      AffineExpr e = dir;
      e.add_constant(-*b.upper);
      rebuilt.emplace_back(std::move(e), b.upper_strict ? Rel::Lt : Rel::Le);
    }
    if (b.lower) {
      AffineExpr e = -dir;
      e.add_constant(*b.lower);
      rebuilt.emplace_back(std::move(e), b.lower_strict ? Rel::Lt : Rel::Le);
    }
  }

  std::sort(rebuilt.begin(), rebuilt.end());
  rebuilt.erase(std::unique(rebuilt.begin(), rebuilt.end()), rebuilt.end());
  atoms_ = std::move(rebuilt);
  return before - atoms_.size();
}

Clause Clause::substituted(VarId var, const Rational& value) const {
  if (contradictory_) return contradiction();
  Clause result;
  const AffineExpr replacement{value};
  for (const auto& a : atoms_) {
    result.insert(Atom(a.expr().substitute(var, replacement), a.rel()));
    if (result.is_false()) break;
  }
  return result;
}

Clause Clause::conjoin(const Clause& other) const {
  if (contradictory_ || other.contradictory_) return contradiction();
  Clause result = *this;
  result.insert_all(other.atoms_);
  result.simplify();
  return result;
}

bool Clause::satisfied_by(const std::map<VarId, Rational>& point) const {
  if (contradictory_) return false;
  for (const auto& a : atoms_)
    if (!a.satisfied_by(point)) return false;
  return true;
}

std::string Clause::to_string() const {
  if (contradictory_) return "FALSE";
  if (atoms_.empty()) return "TRUE";
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out += "  &  ";
    out += atoms_[i].to_string();
  }
  return out;
}

// ---------------------------------------------------------------------------
// DnfFormula

DnfFormula::DnfFormula(Clause clause) {
  add_clause(std::move(clause));
}

DnfFormula::DnfFormula(std::vector<Clause> clauses) {
  for (auto& c : clauses) add_clause(std::move(c));
}

DnfFormula DnfFormula::always_true() {
  DnfFormula f;
  f.clauses_.emplace_back();
  return f;
}

bool DnfFormula::is_true() const {
  for (const auto& c : clauses_)
    if (c.is_true()) return true;
  return false;
}

void DnfFormula::add_clause(Clause c) {
  if (!c.is_false()) clauses_.push_back(std::move(c));
}

void DnfFormula::normalize(bool absorption) {
  clauses_.erase(std::remove_if(clauses_.begin(), clauses_.end(),
                                [](const Clause& c) { return c.is_false(); }),
                 clauses_.end());
  if (is_true()) {
    clauses_.clear();
    clauses_.emplace_back();
    return;
  }
  std::sort(clauses_.begin(), clauses_.end());
  clauses_.erase(std::unique(clauses_.begin(), clauses_.end()),
                 clauses_.end());
  if (!absorption || clauses_.size() > 256) return;

  // drop any clause whose atom set contains another clause's atom set
  std::vector<Clause> kept;
  for (std::size_t i = 0; i < clauses_.size(); ++i) {
    bool absorbed = false;
    for (std::size_t j = 0; j < clauses_.size() && !absorbed; ++j) {
      if (i == j || clauses_[j].size() >= clauses_[i].size()) continue;
      absorbed = std::includes(clauses_[i].atoms().begin(),
                               clauses_[i].atoms().end(),
                               clauses_[j].atoms().begin(),
                               clauses_[j].atoms().end());
    }
    if (!absorbed) kept.push_back(clauses_[i]);
  }
  clauses_ = std::move(kept);
}

std::set<VarId> DnfFormula::free_vars() const {
  std::set<VarId> vars;
  for (const auto& c : clauses_) {
    auto cv = c.free_vars();
    vars.insert(cv.begin(), cv.end());
  }
  return vars;
}

bool DnfFormula::satisfied_by(const std::map<VarId, Rational>& point) const {
  for (const auto& c : clauses_)
    if (c.satisfied_by(point)) return true;
  return false;
}

DnfFormula DnfFormula::conjoin(const DnfFormula& other) const {
  DnfFormula result;
  for (const auto& a : clauses_)
    for (const auto& b : other.clauses_) result.add_clause(a.conjoin(b));
  result.normalize();
  return result;
}

DnfFormula DnfFormula::disjoin(const DnfFormula& other) const {
  DnfFormula result = *this;
  for (const auto& c : other.clauses_) result.add_clause(c);
  result.normalize();
  return result;
}

std::string DnfFormula::to_string() const {
  if (clauses_.empty()) return "FALSE";
  std::string out;
  for (std::size_t i = 0; i < clauses_.size(); ++i) {
    if (i) out += "  |  ";
    out += "(" + clauses_[i].to_string() + ")";
  }
  return out;
}

DnfFormula negate_formula(const DnfFormula& formula, std::size_t max_clauses) {
  if (formula.is_false()) return DnfFormula::always_true();
  if (formula.is_true()) return DnfFormula::always_false();

  // ~(C1 | ... | Cn) = ~C1 & ... & ~Cn, each ~Ci a disjunction of negated
  // atoms; distribute into DNF.
  std::vector<Clause> current;
  current.emplace_back();
  for (const auto& clause : formula.clauses()) {
    std::vector<Atom> options;
    for (const auto& atom : clause.atoms()) {
      for (auto& neg : atom.negation()) {
        if (std::find(options.begin(), options.end(), neg) == options.end())
          options.push_back(std::move(neg));
      }
    }
    std::vector<Clause> next;
    for (const auto& base : current) {
      for (const auto& opt : options) {
        Clause extended = base;
        extended.insert(opt);
        if (extended.is_false()) continue;
        extended.simplify();
        if (extended.is_false()) continue;
        next.push_back(std::move(extended));
        if (next.size() > max_clauses)
          throw BudgetError(BudgetError::Kind::Blowup,
                            "negation exceeded clause budget (" +
                                std::to_string(max_clauses) + ")");
      }
    }
    DnfFormula dedup(std::move(next));
    dedup.normalize(true);
    current = dedup.clauses();
    if (current.empty()) return DnfFormula::always_false();
  }
  DnfFormula result(std::move(current));
  result.normalize(true);
  return result;
}

// ---------------------------------------------------------------------------
// Interval

Interval::Interval(std::optional<Rational> lo, std::optional<Rational> hi,
                   bool lo_open, bool hi_open)
    : lower(std::move(lo)), upper(std::move(hi)), lower_open(lo_open),
      upper_open(hi_open) {
  if (lower && upper) {
    if (*lower > *upper)
      throw Error("interval with lower > upper: " + to_string());
    if (*lower == *upper && (lower_open || upper_open))
      throw Error("degenerate interval must be closed: " + to_string());
  }
}

Interval Interval::closed(Rational lo, Rational hi) {
  return Interval(std::move(lo), std::move(hi), false, false);
}

Interval Interval::point(Rational v) {
  return Interval(v, v, false, false);
}

bool Interval::is_point() const {
  return bounded() && *lower == *upper;
}

Rational Interval::width() const {
  if (!bounded()) throw Error("width of unbounded interval");
  return *upper - *lower;
}

Rational Interval::midpoint() const {
  if (!bounded()) throw Error("midpoint of unbounded interval");
  return (*lower + *upper) / Rational(2);
}

bool Interval::contains(const Rational& v) const {
  if (lower && (v < *lower || (v == *lower && lower_open))) return false;
  if (upper && (v > *upper || (v == *upper && upper_open))) return false;
  return true;
}

bool Interval::contains(const Interval& inner) const {
  if (lower) {
    if (!inner.lower) return false;
    if (*inner.lower < *lower) return false;
    if (*inner.lower == *lower && lower_open && !inner.lower_open)
      return false;
  }
  if (upper) {
    if (!inner.upper) return false;
    if (*inner.upper > *upper) return false;
    if (*inner.upper == *upper && upper_open && !inner.upper_open)
      return false;
  }
  return true;
}

std::optional<Interval> Interval::intersect(const Interval& a,
                                            const Interval& b) {
  std::optional<Rational> lo = a.lower;
  bool lo_open = a.lower_open;
  if (b.lower && (!lo || *b.lower > *lo)) {
    lo = b.lower;
    lo_open = b.lower_open;
  } else if (b.lower && lo && *b.lower == *lo) {
    lo_open = lo_open || b.lower_open;
  }
  std::optional<Rational> hi = a.upper;
  bool hi_open = a.upper_open;
  if (b.upper && (!hi || *b.upper < *hi)) {
    hi = b.upper;
    hi_open = b.upper_open;
  } else if (b.upper && hi && *b.upper == *hi) {
    hi_open = hi_open || b.upper_open;
  }
  if (lo && hi) {
    if (*lo > *hi) return std::nullopt;
    if (*lo == *hi && (lo_open || hi_open)) return std::nullopt;
  }
  return Interval(std::move(lo), std::move(hi), lo_open, hi_open);
}

Interval Interval::hull(const Interval& a, const Interval& b) {
  std::optional<Rational> lo;
  bool lo_open = false;
  if (a.lower && b.lower) {
    if (*a.lower < *b.lower) {
      lo = a.lower;
      lo_open = a.lower_open;
    } else if (*b.lower < *a.lower) {
      lo = b.lower;
      lo_open = b.lower_open;
    } else {
      lo = a.lower;
      lo_open = a.lower_open && b.lower_open;
    }
  }
  std::optional<Rational> hi;
  bool hi_open = false;
  if (a.upper && b.upper) {
    if (*a.upper > *b.upper) {
      hi = a.upper;
      hi_open = a.upper_open;
    } else if (*b.upper > *a.upper) {
      hi = b.upper;
      hi_open = b.upper_open;
    } else {
      hi = a.upper;
      hi_open = a.upper_open && b.upper_open;
    }
  }
  return Interval(std::move(lo), std::move(hi), lo_open, hi_open);
}

std::string Interval::to_string() const {
  std::string out = lower_open || !lower ? "(" : "[";
  out += lower ? lower->to_string() : "-inf";
  out += ", ";
  out += upper ? upper->to_string() : "+inf";
  out += upper_open || !upper ? ")" : "]";
  return out;
}

std::string Interval::to_decimal_string(int places) const {
  std::string out = lower_open || !lower ? "(" : "[";
  out += lower ? lower->to_decimal(places) : "-inf";
  out += ", ";
  out += upper ? upper->to_decimal(places) : "+inf";
  out += upper_open || !upper ? ")" : "]";
  return out;
}

// ---------------------------------------------------------------------------
// Box

Box::Box(std::vector<Interval> d) : dims(std::move(d)) {
  for (const auto& iv : dims) {
    if (!iv.bounded() || iv.lower_open || iv.upper_open)
      throw Error("box dimensions must be closed and finite");
  }
}

std::vector<Atom> Box::atoms() const {
  std::vector<Atom> out;
  out.reserve(dims.size() * 2);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    auto dim_atoms = interval_atoms(VarId::input(static_cast<int>(i)), dims[i]);
    out.insert(out.end(), dim_atoms.begin(), dim_atoms.end());
  }
  return out;
}

Rational Box::volume() const {
  Rational v(1);
  for (const auto& iv : dims) v *= iv.width();
  return v;
}

std::vector<Atom> interval_atoms(VarId var, const Interval& iv) {
  std::vector<Atom> out;
  if (iv.lower) {
    AffineExpr e{*iv.lower};
    e.add_term(var, Rational(-1));
    out.emplace_back(std::move(e), iv.lower_open ? Rel::Lt : Rel::Le);
  }
  if (iv.upper) {
    AffineExpr e{-*iv.upper};
    e.add_term(var, Rational(1));
    out.emplace_back(std::move(e), iv.upper_open ? Rel::Lt : Rel::Le);
  }
  return out;
}

}  // namespace qenet
