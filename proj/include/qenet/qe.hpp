// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_QE_HPP
#define QENET_QE_HPP

#include <chrono>
#include <map>
#include <optional>
#include <vector>

#include "qenet/formula.hpp"

namespace qenet {

/// Caps on elimination work. Exceeding any of them aborts the call with a
/// Timeout/Blowup error carrying partial-progress statistics.
struct EliminationBudget {
  std::size_t max_clauses = 4096;
  std::size_t max_atoms_per_clause = 2048;
  std::optional<std::chrono::duration<double>> deadline =
      std::chrono::duration<double>(7200.0);

  static EliminationBudget unlimited() {
    return {static_cast<std::size_t>(-1), static_cast<std::size_t>(-1),
            std::nullopt};
  }
};

/// Project a conjunction onto the variables other than var. An equality on
/// var is eliminated by substitution; otherwise every (lower, upper) bound
/// pair is combined, strict iff either parent was strict. Atoms not
/// mentioning var pass through.
Clause fm_eliminate_var(const Clause& clause, VarId var,
                        std::size_t max_atoms = EliminationBudget{}
                            .max_atoms_per_clause);

/// Drop atoms implied by the rest of the clause (negation test on the
/// strictly smaller subproblem). Best effort: never removes a
/// non-redundant atom, may keep a redundant one.
Clause remove_redundant(const Clause& clause);

/// Existential elimination, clause by clause. The requested variables may
/// be reordered internally (fewest bound-pair products first); the solution
/// set does not depend on the order.
DnfFormula eliminate_existential(const DnfFormula& formula,
                                 const std::vector<VarId>& vars,
                                 const EliminationBudget& budget = {},
                                 EliminationStats* stats = nullptr);

/// Quantifier-free equivalent of
///   forall quantified . (antecedent => consequent)
/// over the remaining free variables, computed as
///   not exists quantified . (antecedent and not consequent).
DnfFormula eliminate_universal_implication(const DnfFormula& antecedent,
                                           const DnfFormula& consequent,
                                           const std::vector<VarId>& quantified,
                                           const EliminationBudget& budget = {},
                                           EliminationStats* stats = nullptr);

/// Projection of the formula onto a single variable: eliminate everything
/// else, then take the union hull of the per-clause intervals. Throws
/// EmptyRangeError on an unsatisfiable formula.
Interval variable_range(const DnfFormula& formula, VarId var,
                        const EliminationBudget& budget = {},
                        EliminationStats* stats = nullptr);

/// Feasible interval of var in a residual clause that mentions var only.
std::optional<Interval> clause_var_interval(const Clause& clause, VarId var);

/// A satisfying assignment over the formula's free variables, found by
/// repeated range projection and pinning. Variables a clause leaves
/// unconstrained are assigned zero.
std::optional<std::map<VarId, Rational>> satisfying_point(
    const DnfFormula& formula,
    const EliminationBudget& budget = EliminationBudget::unlimited());

}  // namespace qenet

#endif
