#ifndef PSTX_INVERSE_HPP
#define PSTX_INVERSE_HPP

#include "pstx/chain.hpp"
#include "pstx/errors.hpp"
#include "pstx/linalg.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"
#include "pstx/selector.hpp"
#include "pstx/spectral.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pstx {

/// J^2 mu_A = J^2 P/Q with Q monic of degree N_A and P monic of degree N_A - 1.
struct RationalInterpolant {
  Poly P;
  Poly Q;
  real J;
  bool j_known = false;
  real j_squared;        // leading coefficient of the unnormalised numerator
  real max_residual{0};  // max |J^2 mu_A(lambda) mu_C(lambda) - 1| over the targets

  std::size_t size() const { return static_cast<std::size_t>(Q.degree()); }
};

namespace detail {

struct TargetRow {
  real lambda;
  int sector;
};

inline std::vector<TargetRow> target_rows(const TargetSpectrum& t) {
  std::vector<TargetRow> rows;
  for (const auto& v : t.lambda_plus) rows.push_back({v, 1});
  for (const auto& v : t.lambda_minus) rows.push_back({v, -1});
  return rows;
}

inline real mu_at(const Resolvent& r, const real& z) {
  try {
    return r(z);
  } catch (const PoleAt&) {
    throw PoleTarget("target " + to_decimal(z, 20) + " is an eigenvalue of its subspace block");
  }
}

inline real residual_of(const RationalInterpolant& r, const Resolvent& rp, const Resolvent& rm,
                        const std::vector<TargetRow>& rows) {
  using std::abs;
  real worst(0);
  for (const auto& row : rows) {
    const real m = row.sector > 0 ? rp(row.lambda) : rm(row.lambda);
    const real lhs = r.J * r.J * r.P(row.lambda) * m;
    const real rhs = r.Q(row.lambda);
    worst = std::max(worst, real(abs(lhs - rhs) / std::max(real(abs(rhs)), real(abs(lhs)))));
  }
  return worst;
}

inline unsigned solve_bits_for(unsigned requested) { return requested ? requested : 2 * active_precision_bits(); }

}  // namespace detail

/// Solves J^2 P_A(lambda) mu_{C_sigma}(lambda) = Q_A(lambda) over all targets for the
/// coefficients of P_A and Q_A. With `known_j` unset there are 2 N_A targets and J^2
/// comes out as the leading numerator coefficient; otherwise 2 N_A - 1 targets suffice.
inline RationalInterpolant solve_interpolation(const SupportedBlock& cp, const SupportedBlock& cm, const TargetSpectrum& t,
                                               const std::optional<real>& known_j = std::nullopt, unsigned solve_bits = 0) {
  PrecisionScope scope(detail::solve_bits_for(solve_bits));
  const auto rows = detail::target_rows(t);
  const std::size_t total = rows.size();
  const bool jk = known_j.has_value();
  if ((!jk && total % 2 != 0) || (jk && total % 2 != 1))
    throw DimensionTooSmall("target count " + std::to_string(total) + " does not fit the requested mode");
  const std::size_t na = jk ? (total + 1) / 2 : total / 2;
  if (na == 0) throw DimensionTooSmall("no targets");
  std::set<std::string> seen;
  for (const auto& r : rows)
    if (!seen.insert(to_decimal(r.lambda, 30)).second) throw SingularSystem("repeated target " + to_decimal(r.lambda, 20));

  const auto rp = Resolvent::of(cp.matrix);
  const auto rm = Resolvent::of(cm.matrix);
  const real j2 = jk ? real(*known_j * *known_j) : real(0);
  const std::size_t na_coeffs = jk ? na - 1 : na;  // free numerator coefficients
  Matrix<real> m(total, total);
  std::vector<real> rhs(total);
  for (std::size_t r = 0; r < total; ++r) {
    const real& z = rows[r].lambda;
    const real mu = detail::mu_at(rows[r].sector > 0 ? rp : rm, z);
    const real scale = jk ? real(mu * j2) : mu;
    real zp(1);
    for (std::size_t i = 0; i < na; ++i) {
      if (i < na_coeffs) m(r, i) = scale * zp;
      m(r, na_coeffs + i) = -zp;
      zp *= z;
    }
    rhs[r] = zp;  // z^N_A
    if (jk) rhs[r] -= scale * zp / z;
  }
  const auto x = solve_full_pivot(m, rhs, precision_fraction(0.9));

  RationalInterpolant out;
  out.j_known = jk;
  std::vector<real> a(x.begin(), x.begin() + static_cast<long>(na_coeffs));
  std::vector<real> b(x.begin() + static_cast<long>(na_coeffs), x.end());
  b.push_back(real(1));
  out.Q = Poly(b);
  if (jk) {
    a.push_back(real(1));
    out.P = Poly(a);
    out.J = *known_j;
    out.j_squared = j2;
  } else {
    out.j_squared = a.back();
    if (!(out.j_squared > 0)) throw NegativeJSquared("J^2 = " + to_decimal(out.j_squared, 20));
    for (auto& v : a) v /= out.j_squared;
    a.back() = real(1);
    out.P = Poly(a);
    out.J = sqrt(out.j_squared);
  }
  out.max_residual = detail::residual_of(out, rp, rm, rows);
  return out;
}

/// Half-size solve for field-free bipartite systems, where mu_A is odd: with
/// y = z^2 only the positive member of each +-pair is needed. `even_system`
/// says the pairs straddle the two sectors (lambda+ = -lambda-); otherwise
/// both members belong to the same sector.
inline RationalInterpolant solve_field_free(const SupportedBlock& cp, const SupportedBlock& cm, const TargetSpectrum& t,
                                            bool even_system, unsigned solve_bits = 0) {
  PrecisionScope scope(detail::solve_bits_for(solve_bits));
  std::set<std::pair<long, int>> keys;
  for (auto k : t.k_plus) keys.insert({k, 1});
  for (auto k : t.k_minus) keys.insert({k, -1});
  for (const auto& [k, s] : keys) {
    const long mirror = -k - t.offset_halves;
    const int ms = even_system ? -s : s;
    if (2 * k + t.offset_halves == 0) throw ParityMismatch("zero cannot be a target of a field-free design");
    if (!keys.count({mirror, ms})) throw ParityMismatch("target " + to_decimal(t.value(k), 20) + " has no mirrored partner");
  }
  const auto all_rows = detail::target_rows(t);
  std::vector<detail::TargetRow> rows;
  for (const auto& r : all_rows)
    if (r.lambda > 0) rows.push_back(r);
  const std::size_t na = rows.size();
  if (na == 0) throw DimensionTooSmall("no targets");

  const auto rp = Resolvent::of(cp.matrix);
  const auto rm = Resolvent::of(cm.matrix);
  const bool odd = na % 2 == 1;
  const std::size_t h = odd ? (na - 1) / 2 : na / 2;
  const std::size_t num = odd ? h + 1 : h;  // numerator coefficients, last one is J^2
  Matrix<real> m(na, na);
  std::vector<real> rhs(na);
  for (std::size_t r = 0; r < na; ++r) {
    const real& z = rows[r].lambda;
    const real y = z * z;
    const real mu = detail::mu_at(rows[r].sector > 0 ? rp : rm, z);
    // even N_A:  z mu(z) sum a_i y^i - sum b_i y^i = y^h
    // odd  N_A:  mu(z) sum a_i y^i - z sum b_i y^i = z y^h
    const real num_scale = odd ? mu : real(z * mu);
    const real den_scale = odd ? z : real(1);
    real yp(1);
    for (std::size_t i = 0; i < std::max(num, h); ++i) {
      if (i < num) m(r, i) = num_scale * yp;
      if (i < h) m(r, num + i) = -den_scale * yp;
      yp *= y;
    }
    real yh(1);
    for (std::size_t i = 0; i < h; ++i) yh *= y;
    rhs[r] = den_scale * yh;
  }
  const auto x = solve_full_pivot(m, rhs, precision_fraction(0.9));
  std::vector<real> a(x.begin(), x.begin() + static_cast<long>(num));
  std::vector<real> b(x.begin() + static_cast<long>(num), x.end());
  b.push_back(real(1));
  RationalInterpolant out;
  out.j_squared = a.back();
  if (!(out.j_squared > 0)) throw NegativeJSquared("J^2 = " + to_decimal(out.j_squared, 20));
  for (auto& v : a) v /= out.j_squared;
  a.back() = real(1);
  const Poly p_half(a), q_half(b);
  if (odd) {
    out.P = p_half.compose_square();
    out.Q = Poly::x() * q_half.compose_square();
  } else {
    out.P = Poly::x() * p_half.compose_square();
    out.Q = q_half.compose_square();
  }
  out.J = sqrt(out.j_squared);
  out.max_residual = detail::residual_of(out, rp, rm, all_rows);
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction conditions

struct Certificate {
  bool real_roots = false;
  int nonreal_count = 0;
  bool j_positive = false;  // J^2 > 0 (J unknown) or monic numerator (J known)
  bool strict_interlacing = false;
  InterlacingReport interlacing;

  bool ok() const { return real_roots && j_positive && strict_interlacing; }
};

inline Certificate certify_conditions(const RationalInterpolant& r) {
  Certificate c;
  const auto rq = isolate_real_roots(r.Q);
  const auto rp = isolate_real_roots(r.P);
  c.nonreal_count = rq.nonreal_count + rp.nonreal_count;
  c.real_roots = c.nonreal_count == 0;
  c.j_positive = r.j_known ? r.P.leading() > 0 : r.j_squared > 0;
  c.interlacing = check_strict_interlacing(r.Q, r.P);
  c.strict_interlacing = c.interlacing.ok;
  return c;
}

struct SpectralWeights {
  std::vector<real> nodes;    // descending roots of Q_A
  std::vector<real> weights;  // P_A(node) / Q_A'(node)
  real sum{0};
};

inline SpectralWeights to_spectral_weights(const Poly& p, const Poly& q) {
  const auto rq = isolate_real_roots(q);
  if (rq.nonreal_count > 0) throw ComplexRoots(std::to_string(rq.nonreal_count) + " non-real roots of Q");
  SpectralWeights w;
  w.nodes = rq.values();
  for (const auto& r : rq.roots)
    if (r.multiplicity != 1) throw CoincidentRoots("repeated root " + to_decimal(r.value, 20) + " of Q");
  for (std::size_t i = 0; i < w.nodes.size(); ++i) {
    real den(1);
    for (std::size_t j = 0; j < w.nodes.size(); ++j)
      if (j != i) den *= w.nodes[i] - w.nodes[j];
    const real wi = p(w.nodes[i]) / den;
    if (!(wi > 0)) throw NonPositiveWeight("weight at node " + to_decimal(w.nodes[i], 20) + " is " + to_decimal(wi, 10));
    w.weights.push_back(wi);
    w.sum += wi;
  }
  return w;
}

inline SpectralWeights to_spectral_weights(const RationalInterpolant& r) { return to_spectral_weights(r.P, r.Q); }

/// Jacobi matrix with the given spectral measure at its contact site. The
/// recurrence starts at the contact; the result is stored outer end first.
inline TridiagonalChain reconstruct_tridiagonal(const SpectralWeights& w) {
  using std::abs;
  if (w.nodes.empty()) throw DimensionTooSmall("no nodes");
  std::vector<real> start;
  real scale(1);
  for (std::size_t i = 0; i < w.nodes.size(); ++i) {
    if (!(w.weights[i] > 0)) throw NonPositiveWeight("weight " + std::to_string(i));
    start.push_back(sqrt(w.weights[i]));
    scale = std::max(scale, real(abs(w.nodes[i])));
  }
  const auto lz = lanczos_from_spectrum(w.nodes, start, precision_fraction(0.5) * scale, [](std::size_t step) {
    throw BreakdownAtStep("off-diagonal vanished at step " + std::to_string(step));
  });
  TridiagonalChain inner_first{lz.beta, lz.alpha};
  return inner_first.reversed();
}

/// Everything the inverse stage produces for one target spectrum.
struct InverseSolution {
  RationalInterpolant interpolant;
  Certificate certificate;
  SpectralWeights weights;
  TridiagonalChain chain;
  bool half_size = false;
};

/// Solve, certify, reconstruct. Throws on any failed reconstruction condition
/// so the caller can shrink delta and retry.
inline InverseSolution solve_and_reconstruct(const SupportedBlock& cp, const SupportedBlock& cm, const TargetSpectrum& t,
                                             const Classification& cl, unsigned solve_bits = 0) {
  PrecisionScope scope(detail::solve_bits_for(solve_bits));
  InverseSolution s;
  s.half_size = cl.field_free && cl.bipartite;
  s.interpolant = s.half_size ? solve_field_free(cp, cm, t, cl.even, active_precision_bits())
                              : solve_interpolation(cp, cm, t, std::nullopt, active_precision_bits());
  s.certificate = certify_conditions(s.interpolant);
  if (!s.certificate.real_roots) throw ComplexRoots(std::to_string(s.certificate.nonreal_count) + " non-real roots");
  if (!s.certificate.strict_interlacing) throw NonPositiveWeight("interlacing fails: " + s.certificate.interlacing.reason);
  s.weights = to_spectral_weights(s.interpolant);
  s.chain = reconstruct_tridiagonal(s.weights);
  if (s.half_size)
    for (auto& f : s.chain.fields) f = 0;  // odd mu_A forces a zero diagonal
  return s;
}

}  // namespace pstx

#endif  // PSTX_INVERSE_HPP
