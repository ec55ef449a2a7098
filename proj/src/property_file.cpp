// SPDX-License-Identifier: Apache-2.0

#include "qenet/property_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace qenet {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_comment(const std::string& line) {
  return line.empty() || line[0] == '#' || line.rfind("//", 0) == 0;
}

int output_index_of(const std::string& name,
                    const std::vector<std::string>& output_names) {
  auto it = std::find(output_names.begin(), output_names.end(), name);
  if (it != output_names.end())
    return static_cast<int>(it - output_names.begin());
  if (name.size() >= 2 && name[0] == 'y') {
    bool digits = true;
    for (std::size_t i = 1; i < name.size(); ++i)
      digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
    if (digits) {
      int idx = std::stoi(name.substr(1));
      if (idx >= 0 && idx < static_cast<int>(output_names.size())) return idx;
    }
  }
  throw ParseError("unknown output name '" + name + "'");
}

// number | name | number '*' name, combined with +/-.
AffineExpr parse_linear(const std::string& text,
                        const std::vector<std::string>& output_names) {
  AffineExpr expr;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip_ws = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  bool first = true;
  for (;;) {
    skip_ws();
    if (i >= n) {
      if (first) throw ParseError("empty expression in '" + text + "'");
      break;
    }
    Rational sign(1);
    if (text[i] == '+' || text[i] == '-') {
      if (text[i] == '-') sign = Rational(-1);
      ++i;
    } else if (!first) {
      throw ParseError("expected '+' or '-' in '" + text + "'");
    }
    skip_ws();
    if (i >= n) throw ParseError("dangling sign in '" + text + "'");
    first = false;

    // optional numeric factor
    std::optional<Rational> number;
    if (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.') {
      std::size_t start = i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                       text[i] == '.' || text[i] == 'e' || text[i] == 'E' ||
                       ((text[i] == '+' || text[i] == '-') && i > start &&
                        (text[i - 1] == 'e' || text[i - 1] == 'E'))))
        ++i;
      number = rational_from_decimal(text.substr(start, i - start));
      skip_ws();
      if (i < n && text[i] == '*') {
        ++i;
        skip_ws();
      } else if (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) {
        // implicit multiplication "2COC" is not allowed
        throw ParseError("missing '*' before name in '" + text + "'");
      } else {
        expr.add_constant(sign * *number);
        continue;
      }
    }
    // name
    if (i >= n || !std::isalpha(static_cast<unsigned char>(text[i])))
      throw ParseError("expected output name in '" + text + "'");
    std::size_t start = i;
    while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                     text[i] == '_'))
      ++i;
    int idx = output_index_of(text.substr(start, i - start), output_names);
    expr.add_term(VarId::output(idx),
                  sign * (number ? *number : Rational(1)));
  }
  return expr;
}

}  // namespace

Atom parse_output_constraint(const std::string& text,
                             const std::vector<std::string>& output_names) {
  static const struct {
    const char* op;
    int len;
  } ops[] = {{"<=", 2}, {">=", 2}, {"==", 2}, {"<", 1}, {">", 1}, {"=", 1}};
  for (const auto& candidate : ops) {
    std::size_t pos = text.find(candidate.op);
    if (pos == std::string::npos) continue;
    // make sure we did not grab '=' out of '<=' etc.
    if (candidate.len == 1 && pos > 0 &&
        (text[pos - 1] == '<' || text[pos - 1] == '>' || text[pos - 1] == '='))
      continue;
    AffineExpr lhs = parse_linear(text.substr(0, pos), output_names);
    AffineExpr rhs =
        parse_linear(text.substr(pos + candidate.len), output_names);
    std::string op = candidate.op;
    if (op == "<=") return Atom(lhs - rhs, Rel::Le);
    if (op == "<") return Atom(lhs - rhs, Rel::Lt);
    if (op == ">=") return Atom(rhs - lhs, Rel::Le);
    if (op == ">") return Atom(rhs - lhs, Rel::Lt);
    return Atom(lhs - rhs, Rel::Eq);  // = or ==
  }
  throw ParseError("no relation in constraint '" + text + "'");
}

PropertySpec parse_property_file(std::istream& in,
                                 const std::vector<std::string>& output_names,
                                 std::size_t input_dimension) {
  enum class Section { None, Box, Predicate };
  Section section = Section::None;
  std::vector<Interval> dims;
  DnfFormula predicate = DnfFormula::always_true();
  std::vector<Atom> or_block;
  bool in_or = false;
  std::string raw;
  std::size_t line_no = 0;

  auto close_group = [&](std::vector<Atom> atoms) {
    DnfFormula group;
    for (auto& a : atoms) {
      Clause c;
      c.insert(std::move(a));
      group.add_clause(std::move(c));
    }
    predicate = predicate.conjoin(group);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (is_comment(line)) continue;
    if (line == "box:") {
      section = Section::Box;
      continue;
    }
    if (line == "predicate:") {
      section = Section::Predicate;
      continue;
    }
    try {
      if (section == Section::Box) {
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
          throw ParseError("box line must be 'lo, hi'");
        Rational lo = rational_from_decimal(trim(line.substr(0, comma)));
        Rational hi = rational_from_decimal(trim(line.substr(comma + 1)));
        if (lo > hi) throw ParseError("box line with lo > hi");
        dims.push_back(Interval::closed(std::move(lo), std::move(hi)));
      } else if (section == Section::Predicate) {
        if (line == "or:") {
          if (in_or) throw ParseError("nested or: blocks are not supported");
          in_or = true;
          or_block.clear();
        } else if (line == "end") {
          if (!in_or) throw ParseError("'end' outside an or: block");
          if (or_block.empty()) throw ParseError("empty or: block");
          close_group(std::move(or_block));
          or_block.clear();
          in_or = false;
        } else {
          Atom atom = parse_output_constraint(line, output_names);
          if (in_or)
            or_block.push_back(std::move(atom));
          else
            close_group({std::move(atom)});
        }
      } else {
        throw ParseError("content before a box:/predicate: header");
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (in_or) throw ParseError("unterminated or: block", line_no);
  if (dims.size() != input_dimension)
    throw ParseError("box has " + std::to_string(dims.size()) +
                     " dimensions, network expects " +
                     std::to_string(input_dimension));

  PropertySpec spec;
  spec.input_box = Box(std::move(dims));
  spec.output_predicate = std::move(predicate);
  return spec;
}

PropertySpec load_property_file(const std::string& path,
                                const std::vector<std::string>& output_names,
                                std::size_t input_dimension) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open property file: " + path);
  return parse_property_file(in, output_names, input_dimension);
}

}  // namespace qenet
