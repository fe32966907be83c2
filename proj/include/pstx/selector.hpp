#ifndef PSTX_SELECTOR_HPP
#define PSTX_SELECTOR_HPP

#include "pstx/errors.hpp"
#include "pstx/linalg.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"
#include "pstx/spectral.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pstx {

// ---------------------------------------------------------------------------
// Target spectra

/// Targets live on the lattice lambda = (k + c) delta with c = offset_halves / 2.
/// Even k belongs to the symmetric subspace, odd k to the antisymmetric one, so
/// at t0 = pi / delta every target picks up the phase +-exp(-i pi c).
struct TargetSpectrum {
  std::vector<real> lambda_plus;  // descending
  std::vector<real> lambda_minus; // descending
  std::vector<long> k_plus;
  std::vector<long> k_minus;
  real delta;
  int offset_halves = 1;
  real t0;

  real value(long k) const { return real(2 * k + offset_halves) * delta / 2; }
  std::size_t size() const { return lambda_plus.size() + lambda_minus.size(); }
  Complex phase() const { return Complex::polar(-pi() * offset_halves / 2); }
};

inline TargetSpectrum make_target_spectrum(const real& delta, int offset_halves, std::vector<long> k_plus,
                                           std::vector<long> k_minus) {
  TargetSpectrum t;
  t.delta = delta;
  t.offset_halves = ((offset_halves % 4) + 4) % 4;
  t.t0 = pi() / delta;
  std::sort(k_plus.rbegin(), k_plus.rend());
  std::sort(k_minus.rbegin(), k_minus.rend());
  for (auto k : k_plus)
    if (k % 2 != 0) throw TargetsNotPst("symmetric targets need even lattice index, got " + std::to_string(k));
  for (auto k : k_minus)
    if (k % 2 == 0) throw TargetsNotPst("antisymmetric targets need odd lattice index, got " + std::to_string(k));
  t.k_plus = std::move(k_plus);
  t.k_minus = std::move(k_minus);
  for (auto k : t.k_plus) t.lambda_plus.push_back(t.value(k));
  for (auto k : t.k_minus) t.lambda_minus.push_back(t.value(k));
  return t;
}

/// Recovers the lattice description of explicitly given targets.
inline TargetSpectrum targets_from_values(const std::vector<real>& plus, const std::vector<real>& minus, const real& delta,
                                          const real& tol = real("1e-20")) {
  using std::abs;
  if (!(delta > 0)) throw TargetsNotPst("delta must be positive");
  std::optional<int> offset;
  std::vector<long> kp, km;
  auto lattice = [&](const real& lambda, int sector) {
    const real m = 2 * lambda / delta;
    const real mr = round(m);
    if (abs(m - mr) > tol * std::max(real(1), real(abs(m))))
      throw TargetsNotPst(to_decimal(lambda, 20) + " is not a half-integer multiple of delta");
    const long mi = mr.convert_to<long>();
    const int oh = static_cast<int>((((mi - (sector > 0 ? 0 : 2)) % 4) + 4) % 4);
    if (!offset) offset = oh;
    else if (*offset != oh) throw TargetsNotPst("targets do not share one phase pattern");
    return (mi - oh) / 2;
  };
  for (const auto& v : plus) kp.push_back(lattice(v, 1));
  for (const auto& v : minus) km.push_back(lattice(v, -1));
  return make_target_spectrum(delta, offset.value_or(1), kp, km);
}

/// True when every target sits on its sector's lattice at the stored delta.
inline bool pst_parity_check(const TargetSpectrum& t, const real& tol = real("1e-25")) {
  using std::abs;
  auto check = [&](const std::vector<real>& values, int parity) {
    for (const auto& v : values) {
      const real x = v * t.t0 / pi() - real(t.offset_halves) / 2;
      const real k = round(x);
      if (abs(x - k) > tol * std::max(real(1), real(abs(x)))) return false;
      const long ki = k.convert_to<long>();
      if (((ki % 2) + 2) % 2 != parity) return false;
    }
    return true;
  };
  return check(t.lambda_plus, 0) && check(t.lambda_minus, 1);
}

// ---------------------------------------------------------------------------
// Band analysis

struct Band {
  std::optional<real> upper;  // nullopt = +infinity
  std::optional<real> lower;  // nullopt = -infinity
  int sign_plus = 1;
  int sign_minus = 1;
  bool same_sign = true;
  std::optional<int> capacity;  // 1 for same-sign bands, unbounded otherwise
};

struct BandReport {
  std::vector<real> breakpoints;  // descending, distinct
  std::vector<Band> bands;        // from +infinity downwards
  bool top_positive = true;
};

namespace detail {

inline std::vector<real> block_eigenvalues(const Matrix<real>& m) { return symmetric_eigen(m).values; }

inline std::vector<real> breakpoints_of(const Matrix<real>& m) {
  std::vector<real> out = block_eigenvalues(m);
  if (m.rows() > 1) {
    const auto sub = block_eigenvalues(m.without(0));
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace detail

inline BandReport feasibility_bands(const SupportedBlock& cp, const SupportedBlock& cm) {
  BandReport rep;
  std::vector<real> all = detail::breakpoints_of(cp.matrix);
  const auto bm = detail::breakpoints_of(cm.matrix);
  all.insert(all.end(), bm.begin(), bm.end());
  std::sort(all.rbegin(), all.rend());
  for (const auto& x : all)
    if (rep.breakpoints.empty() || !coincident(rep.breakpoints.back(), x, all)) rep.breakpoints.push_back(x);

  const auto rp = Resolvent::of(cp.matrix);
  const auto rm = Resolvent::of(cm.matrix);
  const std::size_t nb = rep.breakpoints.size();
  for (std::size_t k = 0; k <= nb; ++k) {
    Band b;
    if (k > 0) b.upper = rep.breakpoints[k - 1];
    if (k < nb) b.lower = rep.breakpoints[k];
    real z;
    if (nb == 0) z = real(0);
    else if (k == 0) z = rep.breakpoints.front() + 1;
    else if (k == nb) z = rep.breakpoints.back() - 1;
    else z = (*b.upper + *b.lower) / 2;
    b.sign_plus = rp(z) > 0 ? 1 : -1;
    b.sign_minus = rm(z) > 0 ? 1 : -1;
    b.same_sign = b.sign_plus == b.sign_minus;
    if (b.same_sign) b.capacity = 1;
    rep.bands.push_back(b);
  }
  rep.top_positive = rep.bands.front().sign_plus > 0 && rep.bands.front().sign_minus > 0;
  return rep;
}

struct DistinctnessReport {
  bool ok = true;
  std::vector<real> shared;  // descending
};

inline DistinctnessReport verify_distinct_subspace_spectra(const SupportedBlock& cp, const SupportedBlock& cm) {
  DistinctnessReport rep;
  const auto ep = detail::block_eigenvalues(cp.matrix);
  const auto em = detail::block_eigenvalues(cm.matrix);
  std::vector<real> all = ep;
  all.insert(all.end(), em.begin(), em.end());
  for (const auto& a : ep)
    for (const auto& b : em)
      if (coincident(a, b, all)) rep.shared.push_back(a);
  std::sort(rep.shared.rbegin(), rep.shared.rend());
  rep.ok = rep.shared.empty();
  return rep;
}

struct TimeBound {
  real gap;
  real bound;
  bool shared_warning = false;
};

inline TimeBound transfer_time_bound(const SupportedBlock& cp, const SupportedBlock& cm) {
  std::vector<real> all = detail::block_eigenvalues(cp.matrix);
  const auto em = detail::block_eigenvalues(cm.matrix);
  all.insert(all.end(), em.begin(), em.end());
  std::sort(all.begin(), all.end());
  std::vector<real> distinct;
  TimeBound tb;
  for (const auto& x : all) {
    if (!distinct.empty() && coincident(distinct.back(), x, all)) {
      tb.shared_warning = true;
      continue;
    }
    distinct.push_back(x);
  }
  if (distinct.size() < 2) throw DimensionTooSmall("need two distinct eigenvalues for a spectral gap");
  tb.gap = distinct[1] - distinct[0];
  for (std::size_t k = 2; k < distinct.size(); ++k) tb.gap = std::min(tb.gap, real(distinct[k] - distinct[k - 1]));
  tb.bound = pi() / tb.gap;
  return tb;
}

// ---------------------------------------------------------------------------
// Pair pinning

enum class PinningMode { Even, OddFieldFree, General };

struct PinningScales {
  std::optional<real> delta1;
  std::optional<real> delta2;

  real base() const {
    if (delta1 && delta2) return std::min(*delta1, *delta2);
    if (delta1) return *delta1;
    if (delta2) return *delta2;
    return real(1);
  }
};

namespace detail {

inline std::optional<real> interlace_distance(const Matrix<real>& m) {
  using std::abs;
  if (m.rows() < 2) return std::nullopt;
  const auto ev = block_eigenvalues(m);
  const auto sub = block_eigenvalues(m.without(0));
  real best = abs(ev[0] - sub[0]);
  for (const auto& l : ev)
    for (const auto& g : sub) best = std::min(best, real(abs(l - g)));
  return best;
}

inline void min_into(std::optional<real>& acc, const std::optional<real>& v) {
  if (!v) return;
  acc = acc ? std::min(*acc, *v) : *v;
}

}  // namespace detail

/// Scales for the field-free even case, from the symmetric block alone:
/// delta1 = min |lambda - gamma| against the principal-submatrix roots and
/// delta2 = min |lambda + gamma| / 2 over non-cancelling pairs of eigenvalues.
inline PinningScales pinning_scales_even(const SupportedBlock& cp) {
  using std::abs;
  PinningScales s;
  s.delta1 = detail::interlace_distance(cp.matrix);
  const auto ev = detail::block_eigenvalues(cp.matrix);
  std::vector<real> context = ev;
  for (const auto& x : ev) context.push_back(-x);
  for (const auto& l : ev)
    for (const auto& g : ev) {
      if (coincident(l, real(-g), context)) continue;
      detail::min_into(s.delta2, real(abs(l + g) / 2));
    }
  return s;
}

/// Scales when the two blocks are unrelated: delta1 over both blocks, and
/// delta2 = min |lambda+ - lambda-| / 2 across blocks (zero if they share a value).
inline PinningScales pinning_scales_general(const SupportedBlock& cp, const SupportedBlock& cm) {
  using std::abs;
  PinningScales s;
  detail::min_into(s.delta1, detail::interlace_distance(cp.matrix));
  detail::min_into(s.delta1, detail::interlace_distance(cm.matrix));
  const auto ep = detail::block_eigenvalues(cp.matrix);
  const auto em = detail::block_eigenvalues(cm.matrix);
  for (const auto& a : ep)
    for (const auto& b : em) detail::min_into(s.delta2, real(abs(a - b) / 2));
  return s;
}

inline PinningScales pinning_scales(const SupportedBlock& cp, const SupportedBlock& cm, PinningMode mode) {
  return mode == PinningMode::Even ? pinning_scales_even(cp) : pinning_scales_general(cp, cm);
}

namespace detail {

// Largest k of the given parity with (k + c) delta < lambda, or smallest with > lambda.
inline long lattice_below(const real& x, int parity) {
  const real y = (x - parity) / 2;
  return 2 * (ceil(y).convert_to<long>() - 1) + parity;
}
inline long lattice_above(const real& x, int parity) {
  const real y = (x - parity) / 2;
  return 2 * (floor(y).convert_to<long>() + 1) + parity;
}

struct Flank {
  long below, above;
};

inline Flank flank(const real& lambda, const real& delta, int offset_halves, int parity) {
  const real x = lambda / delta - real(offset_halves) / 2;
  Flank f{lattice_below(x, parity), lattice_above(x, parity)};
  const real lo = (real(f.below) + real(offset_halves) / 2) * delta;
  const real hi = (real(f.above) + real(offset_halves) / 2) * delta;
  if (!(lo < lambda && lo >= lambda - 2 * delta) || !(hi > lambda && hi <= lambda + 2 * delta))
    throw NoParityRepresentative("no lattice point of parity " + std::to_string(parity) + " beside " + to_decimal(lambda, 20));
  return f;
}

}  // namespace detail

/// Flanks every supported eigenvalue of each block with two targets of that
/// block's sector, one in [lambda - 2 delta, lambda) and one in (lambda, lambda + 2 delta].
inline TargetSpectrum pair_pinning_select(const SupportedBlock& cp, const SupportedBlock& cm, const real& shrink,
                                          PinningMode mode) {
  using std::abs;
  const PinningScales scales = pinning_scales(cp, cm, mode);
  const real base = scales.base();
  if (!(base > precision_fraction(0.5)))
    throw SharedSpectraFatal("pinning scale vanishes: the subspace spectra share an eigenvalue");
  const real delta = shrink * base;
  const auto ep = detail::block_eigenvalues(cp.matrix);
  const auto em = detail::block_eigenvalues(cm.matrix);
  std::vector<long> kp, km;

  switch (mode) {
    case PinningMode::Even: {
      for (const auto& l : ep) {
        const auto f = detail::flank(l, delta, 1, 0);
        kp.push_back(f.below);
        kp.push_back(f.above);
      }
      for (auto k : kp) km.push_back(-k - 1);
      return make_target_spectrum(delta, 1, kp, km);
    }
    case PinningMode::General: {
      for (const auto& l : ep) {
        const auto f = detail::flank(l, delta, 1, 0);
        kp.push_back(f.below);
        kp.push_back(f.above);
      }
      for (const auto& l : em) {
        const auto f = detail::flank(l, delta, 1, 1);
        km.push_back(f.below);
        km.push_back(f.above);
      }
      return make_target_spectrum(delta, 1, kp, km);
    }
    case PinningMode::OddFieldFree: {
      const real zero_tol = precision_fraction(0.5) * std::max(real(1), base);
      auto fill = [&](const std::vector<real>& ev, int parity, std::vector<long>& out) {
        std::size_t positives = 0, negatives = 0;
        for (const auto& l : ev) {
          if (abs(l) <= zero_tol) {
            const long k = parity == 0 ? 2 : 1;
            out.push_back(k);
            out.push_back(-k);
          } else if (l > 0) {
            ++positives;
            const auto f = detail::flank(l, delta, 0, parity);
            for (long k : {f.below, f.above}) {
              out.push_back(k);
              out.push_back(-k);
            }
          } else {
            ++negatives;
          }
        }
        if (positives != negatives) throw ParityMismatch("block spectrum is not symmetric about zero");
      };
      fill(ep, 0, kp);
      fill(em, 1, km);
      return make_target_spectrum(delta, 0, kp, km);
    }
  }
  throw std::logic_error("unknown pinning mode");
}

/// Sign of mu_{C_sigma}(lambda) must alternate along the merged descending target list, starting positive.
inline bool mu_alternation_check(const SupportedBlock& cp, const SupportedBlock& cm, const TargetSpectrum& t) {
  const auto rp = Resolvent::of(cp.matrix);
  const auto rm = Resolvent::of(cm.matrix);
  std::vector<std::pair<real, int>> merged;
  for (const auto& v : t.lambda_plus) merged.emplace_back(v, 1);
  for (const auto& v : t.lambda_minus) merged.emplace_back(v, -1);
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  int expect = 1;
  for (const auto& [v, s] : merged) {
    const real m = s > 0 ? rp(v) : rm(v);
    if ((m > 0 ? 1 : -1) != expect) return false;
    expect = -expect;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Rounding to a perfect-transfer spectrum

struct RoundedSpectrum {
  std::vector<long> eta;
  std::vector<real> values;
};

/// Replaces each eigenvalue (descending) by eps * eta_n, eta_n the integer of
/// parity (-1)^(n+1) (n = 1 at the top, even first) nearest lambda_n / eps.
inline RoundedSpectrum round_to_pst_spectrum(const std::vector<real>& eigs, const real& eps) {
  using std::abs;
  for (std::size_t i = 0; i + 1 < eigs.size(); ++i) {
    if (!(eigs[i] > eigs[i + 1])) throw std::invalid_argument("round_to_pst_spectrum: eigenvalues must be strictly descending");
    if (!(2 * eps < eigs[i] - eigs[i + 1])) throw EpsilonTooLarge("2 eps must stay below the smallest gap");
  }
  RoundedSpectrum out;
  for (std::size_t n = 0; n < eigs.size(); ++n) {
    const int parity = n % 2 == 0 ? 0 : 1;
    const real x = eigs[n] / eps;
    const long below = detail::lattice_below(x, parity);
    const long above = detail::lattice_above(x, parity);
    const long exact = round(x).convert_to<long>();
    long pick = (x - below) <= (above - x) ? below : above;
    if (real(exact) == x && ((exact % 2) + 2) % 2 == parity) pick = exact;
    out.eta.push_back(pick);
    out.values.push_back(eps * pick);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factor-of-5 refinement

inline int valuation5(long n) {
  if (n == 0) return std::numeric_limits<int>::max();
  int v = 0;
  while (n % 5 == 0) {
    n /= 5;
    ++v;
  }
  return v;
}

/// Candidate with the largest 5-adic valuation; earlier candidates win ties.
inline long pick_factor5(const std::vector<long>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("pick_factor5: no candidates");
  long best = candidates.front();
  for (auto c : candidates)
    if (valuation5(c) > valuation5(best)) best = c;
  return best;
}

/// Index map between quanta delta_Y = (4p+1) delta_X: (2n + 1/2) delta_Y = (2n' + 1/2) delta_X
/// with n' = (4p+1) n + p; the companion sign gives (4p+1) n - p.
inline long factor5_image(long n, long p, int sign) { return (4 * p + 1) * n + (sign >= 0 ? p : -p); }

struct Factor5Refinement {
  TargetSpectrum spectrum;
  int common_valuation = 0;  // every n is divisible by 5^common_valuation
};

/// Targets are (2n + parity + c) delta; `choices[i]` lists admissible n for target i
/// (same order as k_plus then k_minus). Empty lists keep the current target.
inline Factor5Refinement refine_targets_factor5(const TargetSpectrum& t, const std::vector<std::vector<long>>& choices) {
  std::vector<long> kp = t.k_plus;
  std::vector<long> km = t.k_minus;
  int common = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < kp.size() + km.size(); ++i) {
    long& k = i < kp.size() ? kp[i] : km[i - kp.size()];
    const int parity = i < kp.size() ? 0 : 1;
    long n = (k - parity) / 2;
    if (i < choices.size() && !choices[i].empty()) n = pick_factor5(choices[i]);
    k = 2 * n + parity;
    common = std::min(common, valuation5(n));
  }
  Factor5Refinement r{make_target_spectrum(t.delta, t.offset_halves, kp, km), common == std::numeric_limits<int>::max() ? 0 : common};
  return r;
}

}  // namespace pstx

#endif  // PSTX_SELECTOR_HPP
