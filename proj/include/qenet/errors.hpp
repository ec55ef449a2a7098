// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_ERRORS_HPP
#define QENET_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qenet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input (decimal literals, NNet files, property files).
struct ParseError : Error {
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  std::size_t line;
};

// Division by zero and friends. Exact arithmetic never produces NaN.
struct ArithmeticError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// Counters accumulated by the elimination routines. Exposed on results so
// the CLI can report cost; also carried by BudgetError on abort.
struct EliminationStats {
  std::size_t clauses_produced = 0;
  std::size_t atoms_pruned = 0;
  std::size_t eliminations = 0;
  double seconds = 0.0;

  EliminationStats& operator+=(const EliminationStats& o) {
    clauses_produced += o.clauses_produced;
    atoms_pruned += o.atoms_pruned;
    eliminations += o.eliminations;
    seconds += o.seconds;
    return *this;
  }
};

// Budget exhaustion is an abort, never a wrong answer.
struct BudgetError : Error {
  enum class Kind { Timeout, Blowup };

  BudgetError(Kind kind, const std::string& what, EliminationStats stats = {})
      : Error(what), kind(kind), stats(stats) {}

  Kind kind;
  EliminationStats stats;
};

// variable_range over an unsatisfiable formula.
struct EmptyRangeError : Error {
  using Error::Error;
};

// Precise-mode propagation failure, tagged with the blocking neuron.
struct PropagationError : Error {
  PropagationError(const std::string& what, int layer, int index,
                   int branching_count)
      : Error(what), layer(layer), index(index),
        branching_count(branching_count) {}
  int layer;
  int index;
  int branching_count;
};

}  // namespace qenet

#endif
