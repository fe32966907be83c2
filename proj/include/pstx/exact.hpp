#ifndef PSTX_EXACT_HPP
#define PSTX_EXACT_HPP

#include "pstx/errors.hpp"
#include "pstx/numeric.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

namespace pstx {

using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

inline real rational_to_real(const rational& q) {
  return real(numerator(q).str()) / real(denominator(q).str());
}

/// A value of the form (p/q)·sqrt(k) with k a square-free positive integer.
/// Coupling strengths such as sqrt(2) or sqrt(37)/10 stay exact until evaluated.
class ExactValue {
 public:
  ExactValue() = default;
  ExactValue(long long v) : coefficient_(v) {}  // NOLINT(google-explicit-constructor)
  explicit ExactValue(rational coefficient, bigint radicand = 1)
      : coefficient_(std::move(coefficient)), radicand_(std::move(radicand)) {
    normalize();
  }

  static ExactValue sqrt_of(const rational& r) {
    if (r < 0) throw ParseError("sqrt of a negative value");
    const bigint p = numerator(r);
    const bigint q = denominator(r);
    return ExactValue(rational(1, q), p * q);
  }

  /// Parses products/quotients of decimals, fractions and sqrt(...) terms,
  /// e.g. "3/4", "-1.5", "sqrt(2)", "sqrt(37)/10", "3*sqrt(7/10)/8".
  static ExactValue parse(std::string_view text);

  /// Exact conversion of a binary double (used for JSON numbers).
  static ExactValue from_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
  }

  const rational& coefficient() const { return coefficient_; }
  const bigint& radicand() const { return radicand_; }
  bool is_zero() const { return coefficient_ == 0; }
  bool is_rational() const { return radicand_ == 1; }

  real to_real() const {
    real v = rational_to_real(coefficient_);
    if (radicand_ != 1) v *= sqrt(real(radicand_.str()));
    return v;
  }

  std::string str() const {
    std::string out;
    if (radicand_ == 1) return coefficient_.str();
    const bigint p = numerator(coefficient_);
    const bigint q = denominator(coefficient_);
    if (p == -1) out += "-";
    else if (p != 1) out += p.str() + "*";
    out += "sqrt(" + radicand_.str() + ")";
    if (q != 1) out += "/" + q.str();
    return out;
  }

  friend ExactValue operator*(const ExactValue& a, const ExactValue& b) {
    return ExactValue(a.coefficient_ * b.coefficient_, a.radicand_ * b.radicand_);
  }
  friend ExactValue operator/(const ExactValue& a, const ExactValue& b) {
    if (b.is_zero()) throw ParseError("division by zero");
    return ExactValue(a.coefficient_ / (b.coefficient_ * rational(b.radicand_)), a.radicand_ * b.radicand_);
  }
  friend ExactValue operator-(const ExactValue& a) { return ExactValue(-a.coefficient_, a.radicand_); }
  friend bool operator==(const ExactValue& a, const ExactValue& b) {
    return a.coefficient_ == b.coefficient_ && (a.coefficient_ == 0 || a.radicand_ == b.radicand_);
  }

 private:
  void normalize() {
    if (radicand_ <= 0) {
      if (radicand_ < 0) throw ParseError("negative radicand");
      coefficient_ = 0;
      radicand_ = 1;
      return;
    }
    if (coefficient_ == 0) {
      radicand_ = 1;
      return;
    }
    // Pull square factors out of the radicand; trial division is enough for
    // the small integers that appear in hand-written coupling strengths.
    bigint outside = 1;
    for (bigint f = 2; f * f <= radicand_ && f < 100000; ++f) {
      const bigint sq = f * f;
      while (radicand_ % sq == 0) {
        radicand_ /= sq;
        outside *= f;
      }
    }
    const bigint root = boost::multiprecision::sqrt(radicand_);
    if (root * root == radicand_) {
      outside *= root;
      radicand_ = 1;
    }
    coefficient_ *= rational(outside);
  }

  rational coefficient_{0};
  bigint radicand_{1};
};

namespace detail {

class ExactParser {
 public:
  explicit ExactParser(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      // U+00B7 middle dot is accepted as multiplication.
      if (static_cast<unsigned char>(text[i]) == 0xC2 && i + 1 < text.size() &&
          static_cast<unsigned char>(text[i + 1]) == 0xB7) {
        src_ += '*';
        ++i;
      } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
        src_ += text[i];
      }
    }
  }

  ExactValue parse() {
    if (src_.empty()) throw ParseError("empty value");
    ExactValue v = expression();
    if (pos_ != src_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError(why + " in '" + src_ + "' at " + std::to_string(pos_));
  }

  bool eat(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExactValue expression() {
    ExactValue v = signed_atom();
    while (pos_ < src_.size()) {
      if (eat('*')) v = v * signed_atom();
      else if (eat('/')) v = v / signed_atom();
      else break;
    }
    return v;
  }

  ExactValue signed_atom() {
    if (eat('-')) return -signed_atom();
    eat('+');
    return atom();
  }

  ExactValue atom() {
    if (src_.compare(pos_, 5, "sqrt(") == 0) {
      pos_ += 5;
      ExactValue inner = expression();
      if (!eat(')')) fail("expected ')'");
      if (!inner.is_rational()) fail("nested radicals are not supported");
      return ExactValue::sqrt_of(inner.coefficient());
    }
    if (eat('(')) {
      ExactValue inner = expression();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    return number();
  }

  ExactValue number() {
    const std::size_t start = pos_;
    bigint mantissa = 0;
    long long scale = 0;
    bool seen_digit = false;
    bool seen_point = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        mantissa = mantissa * 10 + (c - '0');
        if (seen_point) --scale;
        seen_digit = true;
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (!seen_digit) {
      pos_ = start;
      fail("expected a number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      bool negative = false;
      if (eat('-')) negative = true;
      else eat('+');
      long long exponent = 0;
      bool any = false;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        exponent = exponent * 10 + (src_[pos_++] - '0');
        any = true;
      }
      if (!any) fail("malformed exponent");
      scale += negative ? -exponent : exponent;
    }
    rational value(mantissa);
    const bigint ten_pow = boost::multiprecision::pow(bigint(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
    if (scale < 0) value /= rational(ten_pow);
    else value *= rational(ten_pow);
    return ExactValue(value);
  }

  std::string src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExactValue ExactValue::parse(std::string_view text) { return detail::ExactParser(text).parse(); }

}  // namespace pstx

#endif  // PSTX_EXACT_HPP
