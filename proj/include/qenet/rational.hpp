// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_RATIONAL_HPP
#define QENET_RATIONAL_HPP

#include <gmpxx.h>

#include <compare>
#include <string>
#include <string_view>

#include "qenet/errors.hpp"

namespace qenet {

/// Exact arbitrary-precision rational, always canonical: gcd(num, den) = 1
/// and den > 0. Backed by GMP.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors int
  Rational(int n) : v_(n) {}   // NOLINT
  Rational(long num, long den);

  static Rational from_mpq(mpq_class q);

  const mpq_class& raw() const { return v_; }
  mpz_class numerator() const { return v_.get_num(); }
  mpz_class denominator() const { return v_.get_den(); }

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  int sign() const { return sgn(v_); }

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const { return from_mpq(-v_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.v_ == b.v_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return a.v_ != b.v_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.v_ < b.v_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.v_ <= b.v_;
  }
  friend bool operator>(const Rational& a, const Rational& b) {
    return a.v_ > b.v_;
  }
  friend bool operator>=(const Rational& a, const Rational& b) {
    return a.v_ >= b.v_;
  }

  Rational abs() const { return from_mpq(::abs(v_)); }
  Rational reciprocal() const;

  /// Canonical "p/q" (or just "p" for integers).
  std::string to_string() const;

  /// Decimal rounded to the nearest 10^-places (ties away from zero),
  /// trailing zeros trimmed.
  std::string to_decimal(int places = 8) const;

  /// Nearest double; for heuristics and display only, never for reasoning.
  double to_double() const { return v_.get_d(); }

 private:
  mpq_class v_;
};

/// Exact value of a decimal literal: optional sign, digits, optional
/// fractional part, optional exponent. No binary rounding is introduced.
Rational rational_from_decimal(std::string_view text);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

}  // namespace qenet

#endif
