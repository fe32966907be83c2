#ifndef PSTX_NUMERIC_HPP
#define PSTX_NUMERIC_HPP

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <ios>
#include <string>

namespace pstx {

/// Working scalar: MPFR float whose mantissa width follows the active PrecisionScope.
using real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

namespace detail {
inline unsigned& active_bits() {
  static unsigned bits = [] {
    real::default_precision(digits10_for_bits(256));
    return 256u;
  }();
  return bits;
}
// Forces the default precision to be set before any real is constructed.
inline const unsigned precision_initialised = active_bits();
}  // namespace detail

/// Mantissa bits used for reals created from now on.
inline unsigned active_precision_bits() { return detail::active_bits(); }

/// Sets the MPFR default precision for the lifetime of the scope.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits)
      : saved_bits_(detail::active_bits()), saved_digits_(real::default_precision()) {
    detail::active_bits() = bits;
    real::default_precision(digits10_for_bits(bits));
  }
  ~PrecisionScope() {
    detail::active_bits() = saved_bits_;
    real::default_precision(saved_digits_);
  }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_bits_;
  unsigned saved_digits_;
};

/// Unit roundoff at the active precision.
inline real epsilon() { return boost::multiprecision::ldexp(real(1), 1 - static_cast<int>(active_precision_bits())); }

/// 2^(-fraction * bits): a tolerance sitting a fixed fraction of the way down the mantissa.
inline real precision_fraction(double fraction) {
  return boost::multiprecision::ldexp(real(1), -static_cast<int>(fraction * active_precision_bits()));
}

inline real pi() { return boost::math::constants::pi<real>(); }

inline real parse_real(const std::string& text) { return real(text); }

/// Decimal scientific notation with a fixed number of significant digits.
inline std::string to_decimal(const real& x, int digits = 40) {
  if (x == 0) return "0";
  return x.str(digits, std::ios_base::scientific);
}

inline double to_double(const real& x) { return x.convert_to<double>(); }

struct Complex {
  real re{0};
  real im{0};

  static Complex polar(const real& angle) { return {cos(angle), sin(angle)}; }

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator*(const real& s, const Complex& a) { return {s * a.re, s * a.im}; }
  Complex conj() const { return {re, -im}; }
  real norm() const { return re * re + im * im; }
  real abs() const { return sqrt(norm()); }
};

}  // namespace pstx

#endif  // PSTX_NUMERIC_HPP
