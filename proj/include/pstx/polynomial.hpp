#ifndef PSTX_POLYNOMIAL_HPP
#define PSTX_POLYNOMIAL_HPP

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pstx {

/// Dense univariate polynomial, coefficients in ascending degree.
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }

  static Polynomial constant(const T& v) { return Polynomial(std::vector<T>{v}); }
  static Polynomial x() { return Polynomial(std::vector<T>{T(0), T(1)}); }

  static Polynomial from_roots(const std::vector<T>& roots) {
    Polynomial p = constant(T(1));
    for (const auto& r : roots) p = p * Polynomial(std::vector<T>{T(-r), T(1)});
    return p;
  }

  /// Degree of the zero polynomial is reported as -1.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coeffs() const { return c_; }
  T operator[](std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
  T leading() const { return c_.empty() ? T(0) : c_.back(); }

  T operator()(const T& z) const {
    T acc(0);
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<T> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * T(static_cast<long>(i));
    return Polynomial(std::move(d));
  }

  Polynomial monic() const {
    if (c_.empty()) throw std::domain_error("monic: zero polynomial");
    std::vector<T> d(c_);
    const T lead = c_.back();
    for (auto& v : d) v /= lead;
    d.back() = T(1);
    return Polynomial(std::move(d));
  }

  /// Largest coefficient magnitude.
  T scale() const {
    using std::abs;
    T s(0);
    for (const auto& v : c_) s = std::max(s, T(abs(v)));
    return s;
  }

  /// p(z) -> p(z^2)
  Polynomial compose_square() const {
    if (c_.empty()) return {};
    std::vector<T> d(2 * c_.size() - 1, T(0));
    for (std::size_t i = 0; i < c_.size(); ++i) d[2 * i] = c_[i];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<T> d(std::max(a.c_.size(), b.c_.size()), T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) d[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) d[i] += b.c_[i];
    return Polynomial(std::move(d));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<T> d(std::max(a.c_.size(), b.c_.size()), T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) d[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) d[i] -= b.c_[i];
    return Polynomial(std::move(d));
  }
  friend Polynomial operator-(const Polynomial& a) { return Polynomial() - a; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<T> d(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) d[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(d));
  }
  friend Polynomial operator*(const T& s, const Polynomial& a) {
    std::vector<T> d(a.c_);
    for (auto& v : d) v *= s;
    return Polynomial(std::move(d));
  }

  /// Euclidean division; remainder coefficients below `drop` (absolute) are treated as zero.
  static std::pair<Polynomial, Polynomial> divmod(const Polynomial& num, const Polynomial& den, const T& drop = T(0)) {
    using std::abs;
    if (den.is_zero()) throw std::domain_error("divmod: division by zero polynomial");
    std::vector<T> r(num.c_);
    const int dd = den.degree();
    if (num.degree() < dd) return {Polynomial(), num};
    std::vector<T> q(static_cast<std::size_t>(num.degree() - dd + 1), T(0));
    for (int k = num.degree(); k >= dd; --k) {
      const T f = r[static_cast<std::size_t>(k)] / den.c_.back();
      q[static_cast<std::size_t>(k - dd)] = f;
      for (int j = 0; j <= dd; ++j) r[static_cast<std::size_t>(k - dd + j)] -= f * den.c_[static_cast<std::size_t>(j)];
      r[static_cast<std::size_t>(k)] = T(0);
    }
    r.resize(static_cast<std::size_t>(dd));
    for (auto& v : r)
      if (abs(v) <= drop) v = T(0);
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<T> c_;
};

/// Monic greatest common divisor under a relative tolerance: a remainder whose
/// coefficients are all below `rel_tol` times the dividend scale counts as zero.
template <class T>
Polynomial<T> approximate_gcd(Polynomial<T> a, Polynomial<T> b, const T& rel_tol) {
  if (a.degree() < b.degree()) std::swap(a, b);
  if (b.is_zero()) return a.is_zero() ? a : a.monic();
  while (!b.is_zero()) {
    const T drop = rel_tol * std::max(a.scale(), b.scale());
    auto [q, r] = Polynomial<T>::divmod(a, b, drop);
    a = b.monic();
    b = r.is_zero() ? r : r.monic();
    if (r.is_zero()) break;
  }
  return a.monic();
}

}  // namespace pstx

#endif  // PSTX_POLYNOMIAL_HPP
