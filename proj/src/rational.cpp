// SPDX-License-Identifier: Apache-2.0

#include "qenet/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace qenet {

Rational::Rational(long num, long den) {
  if (den == 0) throw ArithmeticError("rational with zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational Rational::from_mpq(mpq_class q) {
  Rational r;
  q.canonicalize();
  r.v_ = std::move(q);
  return r;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw ArithmeticError("division by zero");
  v_ /= o.v_;
  return *this;
}

Rational Rational::reciprocal() const {
  if (is_zero()) throw ArithmeticError("reciprocal of zero");
  return from_mpq(1 / v_);
}

std::string Rational::to_string() const {
  return v_.get_str();
}

std::string Rational::to_decimal(int places) const {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(places));
  mpz_class num = ::abs(v_.get_num()) * scale;
  const mpz_class& den = v_.get_den();
  // round half away from zero: floor((2n + d) / 2d)
  mpz_class q = (2 * num + den) / (2 * den);
  mpz_class ipart = q / scale;
  mpz_class fpart = q % scale;

  std::string out = (sgn(v_) < 0 && q != 0) ? "-" : "";
  out += ipart.get_str();
  std::string frac = fpart.get_str();
  frac.insert(frac.begin(), static_cast<size_t>(places) - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  return out;
}

Rational rational_from_decimal(std::string_view text) {
  const std::string input(text);
  std::size_t i = 0;
  const std::size_t n = input.size();
  auto fail = [&]() -> Rational {
    throw ParseError("malformed decimal literal: '" + input + "'");
  };

  bool negative = false;
  if (i < n && (input[i] == '+' || input[i] == '-')) {
    negative = (input[i] == '-');
    ++i;
  }

  std::string digits;
  long frac_digits = 0;
  while (i < n && std::isdigit(static_cast<unsigned char>(input[i])))
    digits += input[i++];
  if (i < n && input[i] == '.') {
    ++i;
    while (i < n && std::isdigit(static_cast<unsigned char>(input[i]))) {
      digits += input[i++];
      ++frac_digits;
    }
  }
  if (digits.empty()) return fail();

  long exponent = 0;
  if (i < n && (input[i] == 'e' || input[i] == 'E')) {
    ++i;
    bool exp_neg = false;
    if (i < n && (input[i] == '+' || input[i] == '-')) {
      exp_neg = (input[i] == '-');
      ++i;
    }
    if (i >= n || !std::isdigit(static_cast<unsigned char>(input[i])))
      return fail();
    std::string exp_digits;
    while (i < n && std::isdigit(static_cast<unsigned char>(input[i])))
      exp_digits += input[i++];
    exponent = std::strtol(exp_digits.c_str(), nullptr, 10);
    if (exp_neg) exponent = -exponent;
  }
  if (i != n) return fail();

  mpz_class mantissa(digits, 10);
  if (negative) mantissa = -mantissa;

  // value = mantissa * 10^(exponent - frac_digits)
  long shift = exponent - frac_digits;
  mpq_class value(mantissa);
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10,
                static_cast<unsigned long>(shift < 0 ? -shift : shift));
  if (shift >= 0)
    value *= mpq_class(pow10);
  else
    value /= mpq_class(pow10);
  return Rational::from_mpq(std::move(value));
}

Rational min(const Rational& a, const Rational& b) { return a <= b ? a : b; }
Rational max(const Rational& a, const Rational& b) { return a >= b ? a : b; }

}  // namespace qenet
