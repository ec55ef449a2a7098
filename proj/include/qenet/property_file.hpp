// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_PROPERTY_FILE_HPP
#define QENET_PROPERTY_FILE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "qenet/robustness.hpp"

namespace qenet {

/// Property file: an input box section and an output predicate section.
///
///   # comment
///   box:
///   0.6, 0.6798577687        (one "lo, hi" line per input dimension)
///   ...
///   predicate:
///   COC <= 1500              (lines are conjoined)
///   or:
///   WL >= 0.5                (an or: ... end block is one disjunction)
///   WR >= 0.5
///   end
///
/// Output names are the network's (COC/WL/WR/SL/SR for 5 outputs) or
/// y0..yk; both are accepted.
PropertySpec parse_property_file(std::istream& in,
                                 const std::vector<std::string>& output_names,
                                 std::size_t input_dimension);

PropertySpec load_property_file(const std::string& path,
                                const std::vector<std::string>& output_names,
                                std::size_t input_dimension);

/// One linear constraint over the named outputs, e.g. "2*COC - WL <= 1500".
Atom parse_output_constraint(const std::string& text,
                             const std::vector<std::string>& output_names);

}  // namespace qenet

#endif
