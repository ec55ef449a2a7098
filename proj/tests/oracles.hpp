// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations the tests check the engine against.
// These deliberately avoid the propagation/encoding path: the pattern
// oracle works on single conjunctions with the clause machinery, the
// samplers evaluate formulas pointwise.

#ifndef QENET_TESTS_ORACLES_HPP
#define QENET_TESTS_ORACLES_HPP

#include <optional>
#include <vector>

#include "qenet/network.hpp"
#include "qenet/qe.hpp"

namespace qenet::testing {

/// Exact per-output ranges by enumerating every ReLU activation pattern:
/// each pattern makes the network affine; minimize/maximize that affine
/// map over the box intersected with the pattern's feasibility polytope;
/// hull the feasible results.
std::vector<Interval> pattern_oracle_ranges(const Network& net,
                                            const Box& box);

/// Dense rational grid search for a satisfying point of a clause: every
/// free variable ranges over [-span, span] in steps of 1/steps_per_unit.
std::optional<std::map<VarId, Rational>> grid_satisfying_point(
    const Clause& clause, long span = 4, long steps_per_unit = 4);

/// Brute-force check of (forall x . antecedent => consequent) for a fixed
/// assignment of the free variables, scanning quantified variables over a
/// dense grid. Exact when every region endpoint lies on the grid.
bool grid_implication_holds(const DnfFormula& antecedent,
                            const DnfFormula& consequent,
                            const std::vector<VarId>& quantified,
                            const std::map<VarId, Rational>& free_assignment,
                            long span, long steps_per_unit);

}  // namespace qenet::testing

#endif
