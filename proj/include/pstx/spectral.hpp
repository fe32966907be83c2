#ifndef PSTX_SPECTRAL_HPP
#define PSTX_SPECTRAL_HPP

#include "pstx/chain.hpp"
#include "pstx/errors.hpp"
#include "pstx/linalg.hpp"
#include "pstx/matrix.hpp"
#include "pstx/numeric.hpp"
#include "pstx/polynomial.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pstx {

using Poly = Polynomial<real>;

// ---------------------------------------------------------------------------
// Characteristic polynomials

/// det(zI - M) in the monomial basis. M is brought to tridiagonal form by
/// Householder reflections and the three-term recurrence does the rest.
inline Poly char_poly(const Matrix<real>& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("char_poly: matrix not square");
  if (n == 0) return Poly::constant(real(1));
  if (n == 1) return Poly({real(-m(0, 0)), real(1)});
  Matrix<real> v = m;
  std::vector<real> d(n), e(n);
  detail::tred2(v, d, e);
  Poly prev = Poly::constant(real(1));
  Poly cur({real(-d[0]), real(1)});
  for (std::size_t k = 1; k < n; ++k) {
    Poly next = Poly({real(-d[k]), real(1)}) * cur - real(e[k] * e[k]) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Characteristic polynomial of M with its first row and column removed.
inline Poly principal_char_poly(const Matrix<real>& m) {
  if (m.rows() == 0) throw DimensionTooSmall("no principal submatrix of an empty matrix");
  return char_poly(m.without(0));
}

// ---------------------------------------------------------------------------
// mu-function

/// Diagonal resolvent element <0|(z - M)^-1|0>, kept in partial-fraction form.
struct Resolvent {
  std::vector<real> values;   // ascending eigenvalues
  std::vector<real> weights;  // |<0|lambda>|^2

  static Resolvent of(const Matrix<real>& m) {
    const auto eig = symmetric_eigen(m);
    Resolvent r;
    r.values = eig.values;
    r.weights.reserve(eig.values.size());
    for (std::size_t k = 0; k < eig.values.size(); ++k) r.weights.push_back(eig.vectors(0, k) * eig.vectors(0, k));
    return r;
  }

  real operator()(const real& z) const {
    using std::abs;
    real scale(1);
    for (const auto& v : values) scale = std::max(scale, real(abs(v)));
    const real pole_tol = precision_fraction(0.9) * scale;
    real acc(0);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const real gap = z - values[k];
      if (abs(gap) <= pole_tol) {
        if (weights[k] > precision_fraction(0.9)) throw PoleAt("z = " + to_decimal(z, 20));
        continue;
      }
      acc += weights[k] / gap;
    }
    return acc;
  }
};

inline real mu(const Matrix<real>& m, const real& z) { return Resolvent::of(m)(z); }

// ---------------------------------------------------------------------------
// Real roots

struct RealRoot {
  real value;
  real lo, hi;  // isolating bracket (lo, hi]
  int multiplicity = 1;
};

struct RootReport {
  std::vector<RealRoot> roots;  // descending
  int nonreal_count = 0;

  std::vector<real> values() const {
    std::vector<real> v;
    for (const auto& r : roots) v.push_back(r.value);
    return v;
  }
  bool all_real_simple() const {
    return nonreal_count == 0 && std::all_of(roots.begin(), roots.end(), [](const RealRoot& r) { return r.multiplicity == 1; });
  }
};

namespace detail {

inline std::vector<Poly> sturm_sequence(const Poly& p) {
  std::vector<Poly> seq{p, p.derivative()};
  const real drop = precision_fraction(0.8) * p.scale();
  while (seq.back().degree() > 0) {
    auto [q, r] = Poly::divmod(seq[seq.size() - 2], seq.back(), drop);
    if (r.is_zero()) break;
    seq.push_back(-r);
  }
  return seq;
}

inline int sign_changes(const std::vector<Poly>& seq, const real& x) {
  int changes = 0;
  int last = 0;
  for (const auto& s : seq) {
    const real v = s(x);
    const int sg = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (last != 0 && sg != last) ++changes;
    last = sg;
  }
  return changes;
}

inline real cauchy_bound(const Poly& p) {
  using std::abs;
  real m(0);
  for (int i = 0; i < p.degree(); ++i) m = std::max(m, real(abs(p[static_cast<std::size_t>(i)] / p.leading())));
  return real(1) + m;
}

// Sign-change refinement of a simple root inside (lo, hi]: bisection to a
// coarse width, then Newton steps that fall back to bisection if they leave
// the bracket.
inline real refine_root(const Poly& p, const Poly& dp, real lo, real hi) {
  using std::abs;
  real flo = p(lo);
  const real fhi = p(hi);
  if (fhi == 0) return hi;
  const real coarse = boost::multiprecision::ldexp(real(1), -40);
  const real fine = epsilon() * 64;
  while (hi - lo > coarse * std::max(real(1), real(abs(hi)))) {
    const real mid = lo + (hi - lo) / 2;
    const real fm = p(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  real x = lo + (hi - lo) / 2;
  for (int it = 0; it < 200; ++it) {
    const real fx = p(x);
    if (fx == 0) return x;
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const real d = dp(x);
    real next = d != 0 ? real(x - fx / d) : real(lo + (hi - lo) / 2);
    if (!(next > lo && next < hi)) next = lo + (hi - lo) / 2;
    const real step = abs(next - x);
    x = next;
    if (step <= fine * std::max(real(1), real(abs(x))) || hi - lo <= fine * std::max(real(1), real(abs(x)))) break;
  }
  return x;
}

// Real roots of a square-free polynomial, ascending, each tagged with `mult`.
inline void isolate_square_free(const Poly& p, int mult, std::vector<RealRoot>& out) {
  if (p.degree() < 1) return;
  if (p.degree() == 1) {
    const real r = -p[0] / p[1];
    out.push_back({r, r, r, mult});
    return;
  }
  const auto seq = sturm_sequence(p);
  const Poly dp = p.derivative();
  const real bound = cauchy_bound(p);
  struct Interval {
    real lo, hi;
    int vlo, vhi;
  };
  std::vector<Interval> stack{{-bound, bound, sign_changes(seq, -bound), sign_changes(seq, bound)}};
  // Off-centre split so symmetric spectra never put a root on a split point.
  const real split = real(511) / 1024;
  const real min_width = epsilon() * 16 * bound;
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    const int count = iv.vlo - iv.vhi;
    if (count <= 0) continue;
    if (count == 1) {
      out.push_back({refine_root(p, dp, iv.lo, iv.hi), iv.lo, iv.hi, mult});
      continue;
    }
    if (iv.hi - iv.lo <= min_width) {
      // Numerically coincident cluster; report it once.
      const real mid = iv.lo + (iv.hi - iv.lo) / 2;
      out.push_back({mid, iv.lo, iv.hi, mult * count});
      continue;
    }
    const real mid = iv.lo + (iv.hi - iv.lo) * split;
    const int vmid = sign_changes(seq, mid);
    stack.push_back({iv.lo, mid, iv.vlo, vmid});
    stack.push_back({mid, iv.hi, vmid, iv.vhi});
  }
}

}  // namespace detail

/// Real roots by Sturm-sequence isolation and bracketed refinement.
/// Repeated roots are found through Yun's square-free decomposition.
inline RootReport isolate_real_roots(const Poly& p) {
  RootReport rep;
  if (p.degree() < 1) return rep;
  const Poly f = p.monic();
  const real tol = precision_fraction(0.75);
  const Poly g = approximate_gcd(f, f.derivative(), tol);
  if (g.degree() == 0) {
    detail::isolate_square_free(f, 1, rep.roots);
  } else {
    Poly b = Poly::divmod(f, g).first.monic();
    Poly c = Poly::divmod(f.derivative(), g).first;
    Poly d = c - b.derivative();
    for (int i = 1; b.degree() > 0 && i <= f.degree(); ++i) {
      const Poly a = d.scale() <= tol * std::max(real(1), c.scale()) ? b : approximate_gcd(b, d, tol);
      detail::isolate_square_free(a, i, rep.roots);
      b = Poly::divmod(b, a).first.monic();
      c = Poly::divmod(d, a).first;
      d = c - b.derivative();
    }
  }
  std::sort(rep.roots.begin(), rep.roots.end(), [](const RealRoot& x, const RealRoot& y) { return x.value > y.value; });
  int real_total = 0;
  for (const auto& r : rep.roots) real_total += r.multiplicity;
  rep.nonreal_count = p.degree() - real_total;
  return rep;
}

// ---------------------------------------------------------------------------
// Coincidence test for values drawn from two spectra

/// Two values coincide when their separation is below 1e-10 of the local
/// spacing, measured against every other value in `context`.
inline bool coincident(const real& a, const real& b, const std::vector<real>& context) {
  using std::abs;
  const real sep = abs(a - b);
  real gap(-1);
  for (const auto& x : context) {
    const real da = abs(a - x);
    if (da <= sep) continue;
    if (gap < 0 || da < gap) gap = da;
  }
  if (gap < 0) gap = std::max(real(1), real(abs(a)));
  return sep < real("1e-10") * gap;
}

// ---------------------------------------------------------------------------
// Sign bands of mu = P/Q

enum class RootSource { Q, P };

struct Breakpoint {
  real position;
  RootSource source;
};

struct SignBandProfile {
  std::vector<Breakpoint> breakpoints;  // descending
  int initial_sign = 1;                 // sign of P/Q above the largest breakpoint
  bool alternates = true;

  /// Sign of P/Q in band k (band 0 lies above breakpoints[0]).
  int sign_in_band(std::size_t k) const { return (k % 2 == 0) ? initial_sign : -initial_sign; }
};

inline SignBandProfile sign_bands(const Poly& q, const Poly& p) {
  const auto rq = isolate_real_roots(q);
  const auto rp = isolate_real_roots(p);
  if (rq.nonreal_count > 0 || rp.nonreal_count > 0)
    throw ComplexRoots(std::to_string(rq.nonreal_count + rp.nonreal_count) + " non-real roots");
  std::vector<real> all = rq.values();
  for (const auto& v : rp.values()) all.push_back(v);
  for (const auto& a : rq.roots)
    for (const auto& b : rp.roots)
      if (coincident(a.value, b.value, all)) throw CoincidentRoots("Q and P share the root " + to_decimal(a.value, 20));

  SignBandProfile prof;
  for (const auto& r : rq.roots) prof.breakpoints.push_back({r.value, RootSource::Q});
  for (const auto& r : rp.roots) prof.breakpoints.push_back({r.value, RootSource::P});
  std::sort(prof.breakpoints.begin(), prof.breakpoints.end(),
            [](const Breakpoint& x, const Breakpoint& y) { return x.position > y.position; });

  auto sign_at = [&](const real& z) {
    const real v = p(z) / q(z);
    return v > 0 ? 1 : -1;
  };
  const std::size_t nb = prof.breakpoints.size();
  if (nb == 0) {
    prof.initial_sign = sign_at(real(0));
    return prof;
  }
  prof.initial_sign = sign_at(prof.breakpoints.front().position + 1);
  for (std::size_t k = 1; k <= nb; ++k) {
    const real z = k < nb ? real((prof.breakpoints[k - 1].position + prof.breakpoints[k].position) / 2)
                          : real(prof.breakpoints.back().position - 1);
    if (sign_at(z) != prof.sign_in_band(k)) prof.alternates = false;
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Interlacing

struct InterlacingReport {
  bool ok = false;
  std::optional<std::pair<real, real>> gap;  // offending gap (lower, upper) between Q roots
  std::string reason;
};

/// True iff the roots of P strictly separate the (real, simple) roots of Q.
inline InterlacingReport check_strict_interlacing(const Poly& q, const Poly& p) {
  InterlacingReport rep;
  if (p.degree() != q.degree() - 1) {
    rep.reason = "degree of P must be one less than degree of Q";
    return rep;
  }
  const auto rq = isolate_real_roots(q);
  if (!rq.all_real_simple()) {
    rep.reason = "Q has non-real or repeated roots";
    return rep;
  }
  const auto rp = isolate_real_roots(p);
  if (rp.nonreal_count > 0) {
    rep.reason = "P has non-real roots";
    return rep;
  }
  std::vector<real> pr;
  for (const auto& r : rp.roots)
    for (int m = 0; m < r.multiplicity; ++m) pr.push_back(r.value);
  const auto qv = rq.values();
  for (std::size_t i = 0; i + 1 < qv.size(); ++i) {
    int inside = 0;
    bool touching = false;
    for (const auto& x : pr) {
      if (x < qv[i] && x > qv[i + 1]) ++inside;
      if (x == qv[i] || x == qv[i + 1]) touching = true;
    }
    if (inside != 1 || touching) {
      rep.gap = std::make_pair(qv[i + 1], qv[i]);
      rep.reason = "gap holds " + std::to_string(inside) + " roots of P";
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

// ---------------------------------------------------------------------------
// The block identity Q_H = Q_A Q_C - J^2 P_A P_C

/// [A | J | C]: the chain's contact (its last site) couples to row 0 of C.
inline Matrix<real> join_chain_block(const TridiagonalChain& a, const Matrix<real>& c, const real& j) {
  const std::size_t na = a.size();
  const std::size_t nc = c.rows();
  Matrix<real> h(na + nc, na + nc);
  const auto am = a.to_matrix();
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t k = 0; k < na; ++k) h(i, k) = am(i, k);
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < nc; ++k) h(na + i, na + k) = c(i, k);
  if (nc > 0) h(na - 1, na) = h(na, na - 1) = j;
  return h;
}

/// Largest relative mismatch between det(z - H) and Q_A Q_C - J^2 P_A P_C over the samples.
inline real verify_identity_eq1(const TridiagonalChain& a, const Matrix<real>& c, const real& j,
                                const std::vector<real>& samples) {
  using std::abs;
  const Matrix<real> h = join_chain_block(a, c, j);
  const auto polys = a.leading_char_polys();
  const Poly& qa = polys.back();
  const Poly& pa = polys[a.size() - 1];
  const Poly qc = char_poly(c);
  const Poly pc = c.rows() > 0 ? principal_char_poly(c) : Poly();
  real worst(0);
  for (const auto& z : samples) {
    Matrix<real> shifted(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t k = 0; k < h.cols(); ++k) shifted(i, k) = (i == k ? z : real(0)) - h(i, k);
    const real lhs = determinant(shifted);
    const real t1 = qa(z) * qc(z);
    const real t2 = j * j * pa(z) * pc(z);
    const real scale = std::max({real(abs(t1)), real(abs(t2)), real(abs(lhs)), precision_fraction(0.9)});
    worst = std::max(worst, real(abs(lhs - (t1 - t2)) / scale));
  }
  return worst;
}

}  // namespace pstx

#endif  // PSTX_SPECTRAL_HPP
