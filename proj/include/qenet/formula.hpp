// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_FORMULA_HPP
#define QENET_FORMULA_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qenet/affine.hpp"

namespace qenet {

/// Relation of a linear atom, always against zero.
enum class Rel : std::uint8_t {
  Le,  // expr <= 0
  Lt,  // expr < 0
  Eq   // expr == 0
};

/// A linear constraint in canonical form: the leading coefficient (by VarId
/// order) is scaled to +-1, and equalities are sign-normalized to +1.
/// Ground atoms (constant expr) keep their truth value and are resolved at
/// clause level.
class Atom {
 public:
  Atom(AffineExpr expr, Rel rel);

  const AffineExpr& expr() const { return expr_; }
  Rel rel() const { return rel_; }

  bool is_ground() const { return expr_.is_constant(); }
  /// Truth of a ground atom.
  bool ground_truth() const;

  /// Negation as a disjunction of one or two atoms.
  std::vector<Atom> negation() const;

  bool satisfied_by(const std::map<VarId, Rational>& point) const;

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.rel_ == b.rel_ && a.expr_ == b.expr_;
  }
  friend auto operator<=>(const Atom& a, const Atom& b) {
    if (a.rel_ != b.rel_)
      return a.rel_ < b.rel_ ? std::strong_ordering::less
                             : std::strong_ordering::greater;
    return a.expr_ <=> b.expr_;
  }

  std::string to_string() const;

 private:
  AffineExpr expr_;
  Rel rel_;
};

/// Conjunction of atoms, deduplicated and kept sorted. A clause that
/// acquires a trivially-false atom collapses to FALSE.
class Clause {
 public:
  Clause() = default;
  explicit Clause(std::vector<Atom> atoms);

  static Clause contradiction();

  void insert(Atom atom);
  void insert_all(const std::vector<Atom>& atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool is_false() const { return contradictory_; }
  bool is_true() const { return !contradictory_ && atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  std::set<VarId> free_vars() const;
  bool mentions(VarId v) const;

  /// Bound-combining simplification: collapses parallel bounds, detects
  /// contradictions between opposing bounds, promotes pinched bounds to
  /// equalities. Returns the number of atoms removed.
  std::size_t simplify();

  /// Pin a variable to a constant value.
  Clause substituted(VarId var, const Rational& value) const;

  Clause conjoin(const Clause& other) const;

  bool satisfied_by(const std::map<VarId, Rational>& point) const;

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.contradictory_ == b.contradictory_ && a.atoms_ == b.atoms_;
  }
  friend auto operator<=>(const Clause& a, const Clause& b) {
    if (a.contradictory_ != b.contradictory_)
      return a.contradictory_ ? std::strong_ordering::less
                              : std::strong_ordering::greater;
    return a.atoms_ <=> b.atoms_;
  }

  std::string to_string() const;

 private:
  std::vector<Atom> atoms_;
  bool contradictory_ = false;
};

/// Disjunction of clauses. No clauses = FALSE; one empty clause = TRUE.
class DnfFormula {
 public:
  DnfFormula() = default;
  explicit DnfFormula(Clause clause);
  explicit DnfFormula(std::vector<Clause> clauses);

  static DnfFormula always_true();
  static DnfFormula always_false() { return DnfFormula(); }

  const std::vector<Clause>& clauses() const { return clauses_; }
  bool is_false() const { return clauses_.empty(); }
  bool is_true() const;
  std::size_t size() const { return clauses_.size(); }

  void add_clause(Clause c);

  /// Drop FALSE clauses, sort, deduplicate; with absorption, also drop
  /// clauses whose atom set is a superset of another clause's.
  void normalize(bool absorption = false);

  std::set<VarId> free_vars() const;

  bool satisfied_by(const std::map<VarId, Rational>& point) const;

  /// Distributive conjunction; the product size is the caller's problem.
  DnfFormula conjoin(const DnfFormula& other) const;
  DnfFormula disjoin(const DnfFormula& other) const;

  std::string to_string() const;

 private:
  std::vector<Clause> clauses_;
};

/// Negation via CNF distribution; throws BudgetError(Blowup) if the result
/// would exceed max_clauses.
DnfFormula negate_formula(const DnfFormula& formula, std::size_t max_clauses);

/// Interval with optional (= infinite) rational endpoints.
struct Interval {
  std::optional<Rational> lower;
  std::optional<Rational> upper;
  bool lower_open = false;
  bool upper_open = false;

  Interval() = default;
  Interval(std::optional<Rational> lo, std::optional<Rational> hi,
           bool lo_open = false, bool hi_open = false);

  static Interval closed(Rational lo, Rational hi);
  static Interval point(Rational v);
  static Interval unbounded() { return Interval(); }

  bool bounded() const { return lower.has_value() && upper.has_value(); }
  bool is_point() const;
  Rational width() const;  // requires bounded
  Rational midpoint() const;  // requires bounded

  bool contains(const Rational& v) const;
  /// True if every point of inner lies in *this.
  bool contains(const Interval& inner) const;

  /// Empty intersections have no representation; nullopt instead.
  static std::optional<Interval> intersect(const Interval& a,
                                           const Interval& b);
  static Interval hull(const Interval& a, const Interval& b);

  friend bool operator==(const Interval&, const Interval&) = default;

  std::string to_string() const;
  std::string to_decimal_string(int places = 8) const;
};

/// Axis-aligned input box: one closed finite interval per dimension.
struct Box {
  std::vector<Interval> dims;

  Box() = default;
  explicit Box(std::vector<Interval> d);

  std::size_t dimension() const { return dims.size(); }

  /// Bound atoms lo_i <= x_i <= hi_i with x_i = Input(i).
  std::vector<Atom> atoms() const;

  Rational volume() const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// lo <= var and var <= hi as atoms (skipping infinite ends).
std::vector<Atom> interval_atoms(VarId var, const Interval& iv);

/// Satisfiability of a single conjunction of linear atoms, decided by
/// eliminating every variable and inspecting the ground residue.
/// Defined with the elimination engine.
bool clause_satisfiable(const Clause& clause);

}  // namespace qenet

#endif
