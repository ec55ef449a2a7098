// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_AFFINE_HPP
#define QENET_AFFINE_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qenet/rational.hpp"
#include "qenet/var.hpp"

namespace qenet {

/// Sparse affine expression sum(c_v * v) + constant over VarId-keyed terms.
/// Canonical: terms sorted by VarId, no zero coefficients stored.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(Rational constant) : constant_(std::move(constant)) {}

  static AffineExpr variable(VarId v, Rational coeff = Rational(1));

  const std::vector<std::pair<VarId, Rational>>& terms() const {
    return terms_;
  }
  const Rational& constant() const { return constant_; }

  /// Coefficient of v (zero if absent).
  Rational coeff(VarId v) const;
  bool mentions(VarId v) const;
  bool is_constant() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  /// Smallest variable present; expression must not be constant.
  VarId leading_var() const;

  void add_term(VarId v, const Rational& coeff);
  void add_constant(const Rational& c) { constant_ += c; }

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(const Rational& k);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) {
    return a += b;
  }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) {
    return a -= b;
  }
  friend AffineExpr operator*(AffineExpr a, const Rational& k) {
    return a *= k;
  }
  AffineExpr operator-() const;

  /// Replace var by an expression. The replacement must not mention var.
  AffineExpr substitute(VarId var, const AffineExpr& replacement) const;

  /// Exact evaluation; every mentioned variable must be present in point.
  Rational evaluate(const std::map<VarId, Rational>& point) const;

  friend bool operator==(const AffineExpr&, const AffineExpr&);
  friend auto operator<=>(const AffineExpr& a, const AffineExpr& b) {
    if (auto c = compare_terms(a.terms_, b.terms_); c != 0)
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.constant_ < b.constant_) return std::strong_ordering::less;
    if (b.constant_ < a.constant_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string to_string() const;

 private:
  static int compare_terms(const std::vector<std::pair<VarId, Rational>>& a,
                           const std::vector<std::pair<VarId, Rational>>& b);

  std::vector<std::pair<VarId, Rational>> terms_;
  Rational constant_;
};

/// Spec-facing alias for AffineExpr::substitute.
inline AffineExpr affine_substitute(const AffineExpr& target, VarId var,
                                    const AffineExpr& replacement) {
  return target.substitute(var, replacement);
}

}  // namespace qenet

#endif
