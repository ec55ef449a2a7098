// SPDX-License-Identifier: Apache-2.0

#include "qenet/affine.hpp"

#include <algorithm>

namespace qenet {

AffineExpr AffineExpr::variable(VarId v, Rational coeff) {
  AffineExpr e;
  if (!coeff.is_zero()) e.terms_.emplace_back(v, std::move(coeff));
  return e;
}

Rational AffineExpr::coeff(VarId v) const {
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), v,
      [](const auto& term, VarId key) { return term.first < key; });
  if (it != terms_.end() && it->first == v) return it->second;
  return Rational(0);
}

bool AffineExpr::mentions(VarId v) const {
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), v,
      [](const auto& term, VarId key) { return term.first < key; });
  return it != terms_.end() && it->first == v;
}

VarId AffineExpr::leading_var() const {
  if (terms_.empty()) throw Error("leading_var of constant expression");
  return terms_.front().first;
}

void AffineExpr::add_term(VarId v, const Rational& coeff) {
  if (coeff.is_zero()) return;
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), v,
      [](const auto& term, VarId key) { return term.first < key; });
  if (it != terms_.end() && it->first == v) {
    it->second += coeff;
    if (it->second.is_zero()) terms_.erase(it);
  } else {
    terms_.insert(it, {v, coeff});
  }
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  // merge sorted term lists
  std::vector<std::pair<VarId, Rational>> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  while (a != terms_.end() || b != o.terms_.end()) {
    if (b == o.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      merged.push_back(*b++);
    } else {
      Rational sum = a->second + b->second;
      if (!sum.is_zero()) merged.emplace_back(a->first, std::move(sum));
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
  constant_ += o.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  return *this += -o;
}

AffineExpr& AffineExpr::operator*=(const Rational& k) {
  if (k.is_zero()) {
    terms_.clear();
    constant_ = Rational(0);
    return *this;
  }
  for (auto& [v, c] : terms_) c *= k;
  constant_ *= k;
  return *this;
}

AffineExpr AffineExpr::operator-() const {
  AffineExpr r = *this;
  for (auto& [v, c] : r.terms_) c = -c;
  r.constant_ = -r.constant_;
  return r;
}

AffineExpr AffineExpr::substitute(VarId var, const AffineExpr& replacement) const {
  if (replacement.mentions(var))
    throw Error("self-referential substitution of " + var.name());
  Rational c = coeff(var);
  if (c.is_zero()) return *this;
  AffineExpr result = *this;
  result.add_term(var, -c);  // drop the var term
  AffineExpr scaled = replacement;
  scaled *= c;
  result += scaled;
  return result;
}

Rational AffineExpr::evaluate(const std::map<VarId, Rational>& point) const {
  Rational acc = constant_;
  for (const auto& [v, c] : terms_) {
    auto it = point.find(v);
    if (it == point.end())
      throw Error("evaluation point missing variable " + v.name());
    acc += c * it->second;
  }
  return acc;
}

bool operator==(const AffineExpr& a, const AffineExpr& b) {
  return a.constant_ == b.constant_ && a.terms_ == b.terms_;
}

int AffineExpr::compare_terms(
    const std::vector<std::pair<VarId, Rational>>& a,
    const std::vector<std::pair<VarId, Rational>>& b) {
  auto i = a.begin();
  auto j = b.begin();
  for (; i != a.end() && j != b.end(); ++i, ++j) {
    if (i->first != j->first) return i->first < j->first ? -1 : 1;
    if (i->second != j->second) return i->second < j->second ? -1 : 1;
  }
  if (i != a.end()) return 1;
  if (j != b.end()) return -1;
  return 0;
}

std::string AffineExpr::to_string() const {
  if (terms_.empty()) return constant_.to_string();
  std::string out;
  bool first = true;
  for (const auto& [v, c] : terms_) {
    if (first) {
      if (c == Rational(1))
        out += v.name();
      else if (c == Rational(-1))
        out += "-" + v.name();
      else
        out += c.to_string() + "*" + v.name();
      first = false;
      continue;
    }
    if (c.sign() > 0)
      out += " + " + (c == Rational(1) ? v.name() : c.to_string() + "*" + v.name());
    else
      out += " - " +
             ((-c) == Rational(1) ? v.name() : (-c).to_string() + "*" + v.name());
  }
  if (!constant_.is_zero()) {
    if (constant_.sign() > 0)
      out += " + " + constant_.to_string();
    else
      out += " - " + (-constant_).to_string();
  }
  return out;
}

}  // namespace qenet
