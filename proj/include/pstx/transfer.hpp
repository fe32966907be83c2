#ifndef PSTX_TRANSFER_HPP
#define PSTX_TRANSFER_HPP

#include "pstx/chain.hpp"
#include "pstx/errors.hpp"
#include "pstx/linalg.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"
#include "pstx/selector.hpp"
#include "pstx/spectral.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace pstx {

// ---------------------------------------------------------------------------
// Assembly

/// Full Hamiltonian laid out as [left chain, outer end first | C | right chain, inner end first].
/// The left contact couples to the input vertex, its mirror image to S(input).
inline Matrix<real> assemble(const TridiagonalChain& a, const SymmetrizedSystem& sys, const real& J) {
  const std::size_t na = a.size();
  const std::size_t dc = sys.dim();
  const std::size_t n = 2 * na + dc;
  Matrix<real> h(n, n);
  for (std::size_t i = 0; i < dc; ++i)
    for (std::size_t j = 0; j < dc; ++j) h(na + i, na + j) = sys.C(i, j);
  if (na == 0) return h;
  a.check();
  const std::size_t right0 = na + dc;
  for (std::size_t i = 0; i < na; ++i) {
    h(i, i) = a.fields[i];
    h(n - 1 - i, n - 1 - i) = a.fields[i];
  }
  for (std::size_t i = 0; i + 1 < na; ++i) {
    h(i, i + 1) = h(i + 1, i) = a.couplings[i];
    h(n - 1 - i, n - 2 - i) = h(n - 2 - i, n - 1 - i) = a.couplings[i];
  }
  const std::size_t in = na + sys.input();
  const std::size_t out = na + sys.mirror_input();
  h(na - 1, in) = h(in, na - 1) = J;
  h(right0, out) = h(out, right0) = J;
  return h;
}

/// The mirror of the assembled layout: chains reflect end to end, C vertices follow S.
inline Permutation assembled_mirror(std::size_t na, const SymmetrizedSystem& sys) {
  const std::size_t dc = sys.dim();
  const std::size_t n = 2 * na + dc;
  Permutation s(n);
  for (std::size_t i = 0; i < na; ++i) {
    s[i] = n - 1 - i;
    s[n - 1 - i] = i;
  }
  for (std::size_t v = 0; v < dc; ++v) s[na + v] = na + sys.S[v];
  return s;
}

inline bool is_symmetric_under(const Matrix<real>& h, const Permutation& s) {
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j)
      if (h(s[i], s[j]) != h(i, j)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Spectrum

struct TaggedSpectrum {
  std::vector<real> values;  // ascending within the merged list
  Matrix<real> vectors;      // columns, full space
  std::vector<int> sector;   // +1 symmetric, -1 antisymmetric
};

/// Eigenpairs of an S-invariant matrix, each with a definite mirror parity.
inline TaggedSpectrum symmetric_spectrum(const Matrix<real>& h, const Permutation& s) {
  const auto blocks = symmetry_blocks(h, s);
  const auto ep = symmetric_eigen(blocks.plus);
  const auto em = symmetric_eigen(blocks.minus);
  struct Entry {
    real value;
    int sector;
    std::size_t index;
  };
  std::vector<Entry> all;
  for (std::size_t k = 0; k < ep.values.size(); ++k) all.push_back({ep.values[k], 1, k});
  for (std::size_t k = 0; k < em.values.size(); ++k) all.push_back({em.values[k], -1, k});
  std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
  TaggedSpectrum out;
  out.vectors = Matrix<real>(h.rows(), all.size());
  for (std::size_t c = 0; c < all.size(); ++c) {
    const auto& e = all[c];
    const auto& eig = e.sector > 0 ? ep : em;
    out.values.push_back(e.value);
    out.sector.push_back(e.sector);
    out.vectors.set_column(c, blocks.lift(eig.vectors.column(e.index), e.sector));
  }
  return out;
}

/// Perfect-transfer lattice test: lambda = (k + c) delta with k even on the
/// symmetric sector and odd on the antisymmetric one.
inline bool satisfies_pst(const real& lambda, int sector, const real& delta, int offset_halves,
                          const real& tol = real("1e-5")) {
  using std::abs;
  const real x = lambda / delta - real(offset_halves) / 2;
  const real k = round(x);
  if (abs(x - k) > tol) return false;
  const long ki = k.convert_to<long>();
  return (((ki % 2) + 2) % 2 == 0) == (sector > 0);
}

// ---------------------------------------------------------------------------
// Encoding

/// Orthonormal basis of the region vectors orthogonal to every given restriction.
/// Rows that vanish on the region impose nothing.
inline std::vector<std::vector<real>> encoding_vectors(const std::vector<std::vector<real>>& restrictions, std::size_t region_size,
                                                       const real& negligible = real("1e-30")) {
  std::vector<std::vector<real>> rows;
  for (const auto& r : restrictions) {
    if (r.size() != region_size) throw std::invalid_argument("restriction length differs from region size");
    if (norm(r) > negligible) rows.push_back(r);
  }
  Matrix<real> m(rows.size(), region_size);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < region_size; ++j) m(i, j) = rows[i][j];
  auto basis = null_space(m, region_size, precision_fraction(0.5));
  if (basis.empty())
    throw EmptyNullSpace(std::to_string(rows.size()) + " uncontrolled eigenvectors span the " + std::to_string(region_size) +
                         "-site region");
  return orthonormalize(basis, precision_fraction(0.5));
}

enum class RegionMode { Auto, NA, NAPlusOne };

struct TransferDesign {
  Matrix<real> H;
  Permutation S;
  std::size_t na = 0;
  std::size_t dim_c = 0;
  std::size_t input = 0;  // input vertex of C, in C coordinates
  real J;
  real delta;
  int offset_halves = 1;
  real t0;
  TaggedSpectrum spectrum;
  std::vector<bool> controlled;
  std::vector<std::size_t> region;     // encoding sites in H coordinates
  std::vector<std::vector<real>> encode;  // full-length vectors supported on `region`
  std::vector<std::size_t> out_sites;  // P_out: the original network
  std::vector<std::size_t> in_sites;   // P_in: mirrored network and the far chain

  std::vector<std::size_t> decode_region() const {
    std::vector<std::size_t> d;
    for (auto i : region) d.push_back(S[i]);
    return d;
  }
  std::size_t controlled_count() const { return static_cast<std::size_t>(std::count(controlled.begin(), controlled.end(), true)); }
};

inline std::vector<std::size_t> encoding_region(std::size_t na, std::size_t input, std::size_t size) {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < std::min(na, size); ++i) r.push_back(i);
  if (size > na) r.push_back(na + input);
  return r;
}

/// Encoding basis on the given region from the uncontrolled eigenvectors.
inline std::vector<std::vector<real>> design_encoding(const TransferDesign& d, const std::vector<std::size_t>& region) {
  std::vector<std::vector<real>> restrictions;
  for (std::size_t k = 0; k < d.spectrum.values.size(); ++k) {
    if (d.controlled[k]) continue;
    std::vector<real> r;
    for (auto i : region) r.push_back(d.spectrum.vectors(i, k));
    restrictions.push_back(std::move(r));
  }
  const auto local = encoding_vectors(restrictions, region.size());
  std::vector<std::vector<real>> out;
  for (const auto& v : local) {
    std::vector<real> full(d.H.rows(), real(0));
    for (std::size_t j = 0; j < region.size(); ++j) full[region[j]] = v[j];
    out.push_back(std::move(full));
  }
  return out;
}

/// Builds H, its tagged spectrum, the controlled set and the encoding.
inline TransferDesign make_design(const TridiagonalChain& a, const SymmetrizedSystem& sys, const real& J, const real& delta,
                                  int offset_halves, RegionMode region = RegionMode::Auto,
                                  const real& pst_tol = real("1e-5")) {
  TransferDesign d;
  d.na = a.size();
  d.dim_c = sys.dim();
  d.input = sys.input();
  d.J = J;
  d.delta = delta;
  d.offset_halves = offset_halves;
  d.t0 = pi() / delta;
  d.H = assemble(a, sys, J);
  d.S = assembled_mirror(d.na, sys);
  d.spectrum = symmetric_spectrum(d.H, d.S);
  for (std::size_t k = 0; k < d.spectrum.values.size(); ++k)
    d.controlled.push_back(satisfies_pst(d.spectrum.values[k], d.spectrum.sector[k], delta, offset_halves, pst_tol));
  for (auto v : sys.left) d.out_sites.push_back(d.na + v);
  for (auto v : sys.right) d.in_sites.push_back(d.na + v);
  for (std::size_t i = 0; i < d.na; ++i) d.in_sites.push_back(d.na + d.dim_c + i);
  std::sort(d.in_sites.begin(), d.in_sites.end());

  auto attempt = [&](std::size_t size) {
    d.region = encoding_region(d.na, d.input, size);
    d.encode = design_encoding(d, d.region);
  };
  switch (region) {
    case RegionMode::NA: attempt(d.na); break;
    case RegionMode::NAPlusOne: attempt(d.na + 1); break;
    case RegionMode::Auto:
      try {
        attempt(d.na);
      } catch (const EmptyNullSpace&) {
        attempt(d.na + 1);
      }
      break;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Time evolution

/// <a| exp(-i H t) |b> from a real spectral decomposition.
inline Complex propagator_element(const TaggedSpectrum& sp, const std::vector<real>& a, const std::vector<real>& b, const real& t) {
  Complex acc;
  for (std::size_t k = 0; k < sp.values.size(); ++k) {
    real pa(0), pb(0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != 0) pa += sp.vectors(i, k) * a[i];
      if (b[i] != 0) pb += sp.vectors(i, k) * b[i];
    }
    acc += (pa * pb) * Complex::polar(-sp.values[k] * t);
  }
  return acc;
}

struct FidelityReport {
  std::vector<real> per_vector;
  real min_fidelity{0};
  Complex phase;  // of the first encode vector
};

/// |<S v| exp(-i H t0) |v>| for every encode vector v.
inline FidelityReport encoded_transfer_fidelity(const TransferDesign& d) {
  FidelityReport rep;
  rep.min_fidelity = real(1);
  for (std::size_t e = 0; e < d.encode.size(); ++e) {
    const auto& v = d.encode[e];
    std::vector<real> sv(v.size(), real(0));
    for (std::size_t i = 0; i < v.size(); ++i) sv[d.S[i]] = v[i];
    const Complex amp = propagator_element(d.spectrum, sv, v, d.t0);
    const real f = amp.abs();
    rep.per_vector.push_back(f);
    rep.min_fidelity = std::min(rep.min_fidelity, f);
    if (e == 0 && f > 0) rep.phase = (1 / f) * amp;
  }
  if (d.encode.empty()) rep.min_fidelity = real(0);
  return rep;
}

/// Restricted propagator sum_k exp(sign i lambda_k t) <row|k><k|col>, as (re, im) matrices.
struct ComplexMatrix {
  Matrix<real> re, im;
};

inline ComplexMatrix restricted_propagator(const TaggedSpectrum& sp, const std::vector<std::size_t>& rows,
                                           const std::vector<std::size_t>& cols, const real& t, int sign) {
  ComplexMatrix m{Matrix<real>(rows.size(), cols.size()), Matrix<real>(rows.size(), cols.size())};
  for (std::size_t k = 0; k < sp.values.size(); ++k) {
    const Complex ph = Complex::polar(sign * sp.values[k] * t);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const real a = sp.vectors(rows[i], k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const real p = a * sp.vectors(cols[j], k);
        m.re(i, j) += p * ph.re;
        m.im(i, j) += p * ph.im;
      }
    }
  }
  return m;
}

/// max |(U U^dagger - I)_ij| for U = exp(-i H t).
inline real unitarity_defect(const TaggedSpectrum& sp, const real& t) {
  using std::abs;
  std::vector<std::size_t> all(sp.vectors.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto u = restricted_propagator(sp, all, all, t, -1);
  const std::size_t n = all.size();
  real worst(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      real re(0), im(0);
      for (std::size_t k = 0; k < n; ++k) {
        // (a + ib)(c - id) with a+ib = U_ik, c+id = U_jk
        re += u.re(i, k) * u.re(j, k) + u.im(i, k) * u.im(j, k);
        im += u.im(i, k) * u.re(j, k) - u.re(i, k) * u.im(j, k);
      }
      if (i == j) re -= 1;
      worst = std::max({worst, real(abs(re)), real(abs(im))});
    }
  return worst;
}

// ---------------------------------------------------------------------------
// State creation

struct CreationReport {
  std::vector<real> singular_values;  // descending
  real min_singular{0};
  real ghz{0};
};

inline real ghz_fidelity(const std::vector<real>& singular_values) {
  real prod(1);
  for (const auto& s : singular_values) prod *= s;
  const real f = (1 + prod) / 2;
  return f * f;
}

/// Singular values of K = P_in exp(i H t0) P_out. K^dagger K is Hermitian; its
/// real 2r x 2r embedding repeats every eigenvalue twice.
inline CreationReport state_creation_map(const TransferDesign& d) {
  const auto k = restricted_propagator(d.spectrum, d.in_sites, d.out_sites, d.t0, 1);
  const std::size_t r = d.out_sites.size();
  Matrix<real> g(2 * r, 2 * r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) {
      real re(0), im(0);
      for (std::size_t i = 0; i < d.in_sites.size(); ++i) {
        re += k.re(i, a) * k.re(i, b) + k.im(i, a) * k.im(i, b);
        im += k.re(i, a) * k.im(i, b) - k.im(i, a) * k.re(i, b);
      }
      g(a, b) = g(r + a, r + b) = re;
      g(r + a, b) = im;
      g(a, r + b) = -im;
    }
  const auto eig = symmetric_eigen(g);
  CreationReport rep;
  for (std::size_t i = 0; i < r; ++i) {
    const real ev = eig.values[2 * r - 1 - 2 * i];
    rep.singular_values.push_back(ev > 0 ? real(sqrt(ev)) : real(0));
  }
  rep.min_singular = rep.singular_values.empty() ? real(0) : rep.singular_values.back();
  rep.ghz = ghz_fidelity(rep.singular_values);
  return rep;
}

/// Best input for creating |psi> on the original network, and the fidelity it reaches.
struct CreationInput {
  std::vector<Complex> input;  // on d.in_sites
  real fidelity;
};

inline CreationInput optimal_input(const TransferDesign& d, const std::vector<real>& psi_on_out) {
  const auto k = restricted_propagator(d.spectrum, d.in_sites, d.out_sites, d.t0, 1);
  CreationInput c;
  c.fidelity = real(0);
  for (std::size_t i = 0; i < d.in_sites.size(); ++i) {
    Complex s;
    for (std::size_t j = 0; j < d.out_sites.size(); ++j) s += psi_on_out[j] * Complex{k.re(i, j), k.im(i, j)};
    c.input.push_back(s);
    c.fidelity += s.norm();
  }
  const real nrm = sqrt(c.fidelity);
  if (nrm > 0)
    for (auto& z : c.input) z = (1 / nrm) * z;
  return c;
}

/// |det [1/(eta_i - lambda_j)]| in product form.
inline real cauchy_determinant_formula(const std::vector<real>& lambda, const std::vector<real>& eta) {
  using std::abs;
  if (lambda.size() != eta.size()) throw std::invalid_argument("Cauchy matrix must be square");
  real num(1), den(1);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t j = i + 1; j < lambda.size(); ++j) num *= (lambda[i] - lambda[j]) * (eta[i] - eta[j]);
  for (const auto& l : lambda)
    for (const auto& e : eta) {
      if (l == e) throw CoincidentRoots("an uncontrolled eigenvalue equals a block eigenvalue");
      den *= l - e;
    }
  return abs(num / den);
}

inline real cauchy_determinant_direct(const std::vector<real>& lambda, const std::vector<real>& eta) {
  using std::abs;
  Matrix<real> m(eta.size(), lambda.size());
  for (std::size_t i = 0; i < eta.size(); ++i)
    for (std::size_t j = 0; j < lambda.size(); ++j) m(i, j) = 1 / (eta[i] - lambda[j]);
  return abs(determinant(m));
}

struct RankCheck {
  int sector;
  bool square;
  real det_direct{0};   // |det M_sigma| built from the block's eigenvectors
  real det_formula{0};  // support factors times the Cauchy product
};

/// |det M_sigma| for the rows <lambda_k| P_out over the uncontrolled eigenvalues
/// lambda_k of sector sigma (those with support on the chain) and the block C_sigma.
inline RankCheck creation_rank_check(const std::vector<real>& uncontrolled, const Matrix<real>& block, int sector) {
  using std::abs;
  RankCheck rc;
  rc.sector = sector;
  rc.square = uncontrolled.size() == block.rows();
  if (!rc.square) return rc;
  const auto eig = symmetric_eigen(block);
  const std::size_t n = block.rows();
  Matrix<real> m(n, n);
  real support(1);
  for (std::size_t i = 0; i < n; ++i) {
    support *= abs(eig.vectors(0, i));
    for (std::size_t j = 0; j < n; ++j) m(i, j) = eig.vectors(0, i) / (eig.values[i] - uncontrolled[j]);
  }
  rc.det_direct = abs(determinant(m));
  rc.det_formula = support * cauchy_determinant_formula(uncontrolled, eig.values);
  return rc;
}

/// Uncontrolled eigenvalues of one sector that reach the chains.
inline std::vector<real> uncontrolled_with_support(const TransferDesign& d, int sector, const real& negligible = real("1e-30")) {
  using std::abs;
  std::vector<real> out;
  for (std::size_t k = 0; k < d.spectrum.values.size(); ++k) {
    if (d.controlled[k] || d.spectrum.sector[k] != sector) continue;
    real w(0);
    for (std::size_t i = 0; i < d.na; ++i) w += d.spectrum.vectors(i, k) * d.spectrum.vectors(i, k);
    if (sqrt(w) > negligible) out.push_back(d.spectrum.values[k]);
  }
  return out;
}

/// Distance from the eigenvector |eta> (index `which` of C) to the span of the
/// two flanking resolvent vectors (C - eta - eps_plus)^-1 |1>, (C - eta + eps_minus)^-1 |1>.
inline real flanking_pair_error(const Matrix<real>& c, std::size_t which, const real& eps_plus, const real& eps_minus) {
  const auto eig = symmetric_eigen(c);
  const std::size_t n = c.rows();
  const real eta = eig.values.at(which);
  auto resolvent_vector = [&](const real& z) {
    std::vector<real> v(n, real(0));
    for (std::size_t k = 0; k < n; ++k) {
      const real coef = eig.vectors(0, k) / (eig.values[k] - z);
      for (std::size_t i = 0; i < n; ++i) v[i] += coef * eig.vectors(i, k);
    }
    return v;
  };
  const auto span = orthonormalize(std::vector<std::vector<real>>{resolvent_vector(eta + eps_plus), resolvent_vector(eta - eps_minus)},
                                   precision_fraction(0.75));
  auto target = eig.vectors.column(which);
  for (const auto& q : span) {
    const real c0 = dot(q, target);
    for (std::size_t i = 0; i < n; ++i) target[i] -= c0 * q[i];
  }
  return norm(target);
}

// ---------------------------------------------------------------------------
// Target containment

/// Relative residual of Q_{H_sigma}(lambda) = Q_A Q_C - J^2 P_A P_C at every target.
inline real target_containment_residual(const TridiagonalChain& a, const Matrix<real>& cp, const Matrix<real>& cm, const real& J,
                                        const TargetSpectrum& t) {
  using std::abs;
  const auto qa = a.char_poly();
  const auto pa = a.contact_removed_char_poly();
  const Poly qcp = char_poly(cp), pcp = principal_char_poly(cp);
  const Poly qcm = char_poly(cm), pcm = principal_char_poly(cm);
  real worst(0);
  auto eval = [&](const real& z, const Poly& qc, const Poly& pc) {
    const real lhs = qa(z) * qc(z);
    const real rhs = J * J * pa(z) * pc(z);
    const real scale = std::max({real(abs(lhs)), real(abs(rhs)), real(1)});
    worst = std::max(worst, real(abs(lhs - rhs) / scale));
  };
  for (const auto& z : t.lambda_plus) eval(z, qcp, pcp);
  for (const auto& z : t.lambda_minus) eval(z, qcm, pcm);
  return worst;
}

}  // namespace pstx

#endif  // PSTX_TRANSFER_HPP
