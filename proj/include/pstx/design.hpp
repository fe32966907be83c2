#ifndef PSTX_DESIGN_HPP
#define PSTX_DESIGN_HPP

#include "pstx/errors.hpp"
#include "pstx/exact.hpp"
#include "pstx/inverse.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"
#include "pstx/selector.hpp"
#include "pstx/transfer.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pstx {

struct RunConfig {
  unsigned precision_bits = 256;
  rational shrink_start{1, 2};
  rational shrink_floor{1, 64};
  ExactValue j_prime{1};
  RegionMode region = RegionMode::Auto;
  SymmetryMode symmetry = SymmetryMode::Auto;
  std::optional<Permutation> involution;
  std::uint64_t seed = 1;
  std::size_t trials = 20;

  void check() const {
    if (precision_bits < 128) throw std::invalid_argument("precision must be at least 128 bits");
    if (!(shrink_floor > 0 && shrink_floor <= shrink_start && shrink_start <= 1))
      throw std::invalid_argument("need 0 < shrink_floor <= shrink_start <= 1");
    if (!(j_prime.coefficient() > 0)) throw std::invalid_argument("J' must be positive");
  }
};

/// Explicit targets supplied with a network instead of pair pinning.
struct TargetRequest {
  std::vector<real> plus;
  std::vector<real> minus;
  real delta;
};

struct ExtendResult {
  SymmetrizedSystem system;
  SupportedBlock c_plus, c_minus;
  Classification classification;
  DistinctnessReport distinct;
  TimeBound time_bound;
  std::optional<PinningMode> pinning;
  rational shrink{0};
  int attempts = 0;
  TargetSpectrum targets;
  InverseSolution inverse;
  TransferDesign design;
  FidelityReport fidelity;
  CreationReport creation;
  real containment_residual{0};
  std::vector<std::string> log;

  bool succeeded() const { return fidelity.min_fidelity >= 1 - real("1e-8"); }
};

inline PinningMode pinning_mode_for(const Classification& cl) {
  if (cl.field_free && cl.bipartite) return cl.even ? PinningMode::Even : PinningMode::OddFieldFree;
  return PinningMode::General;
}

inline std::string to_string(const rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

/// symmetrize -> reduce -> distinctness -> targets (given, or pair pinning with
/// geometric shrink) -> solve -> certify -> reconstruct -> assemble -> encode.
inline ExtendResult extend(const SpinNetwork& net, const RunConfig& cfg, const std::optional<TargetRequest>& request = std::nullopt) {
  cfg.check();
  PrecisionScope scope(cfg.precision_bits);
  net.validate();
  ExtendResult r;
  r.system = symmetrize(net, cfg.j_prime, cfg.symmetry, cfg.involution);
  const real tol = default_support_tolerance();
  r.c_plus = reduce_full_support(r.system.C_plus, unit_contact(r.system.C_plus.rows()), tol);
  r.c_minus = reduce_full_support(r.system.C_minus, unit_contact(r.system.C_minus.rows()), tol);
  r.classification = classify_field_free_even(r.system);
  r.distinct = verify_distinct_subspace_spectra(r.c_plus, r.c_minus);
  r.time_bound = transfer_time_bound(r.c_plus, r.c_minus);
  if (!r.distinct.ok) {
    std::string shared;
    for (const auto& v : r.distinct.shared) shared += " " + to_decimal(v, 12);
    r.log.push_back("subspace spectra share eigenvalues:" + shared);
  }

  if (request) {
    r.targets = targets_from_values(request->plus, request->minus, request->delta);
    r.attempts = 1;
    r.inverse = solve_and_reconstruct(r.c_plus, r.c_minus, r.targets, r.classification);
  } else {
    r.pinning = pinning_mode_for(r.classification);
    bool solved = false;
    for (rational shrink = cfg.shrink_start; shrink >= cfg.shrink_floor; shrink /= 2) {
      ++r.attempts;
      r.shrink = shrink;
      try {
        r.targets = pair_pinning_select(r.c_plus, r.c_minus, rational_to_real(shrink), *r.pinning);
        r.inverse = solve_and_reconstruct(r.c_plus, r.c_minus, r.targets, r.classification);
        solved = true;
        break;
      } catch (const SharedSpectraFatal&) {
        throw;
      } catch (const Error& e) {
        r.log.push_back("shrink " + to_string(shrink) + ": " + e.what());
      }
    }
    if (!solved) {
      if (!r.distinct.ok) throw SharedSpectraFatal("no extension found and the subspace spectra share eigenvalues");
      throw ShrinkFloorReached("no certified extension down to shrink " + to_string(cfg.shrink_floor));
    }
  }
  r.containment_residual =
      target_containment_residual(r.inverse.chain, r.c_plus.matrix, r.c_minus.matrix, r.inverse.interpolant.J, r.targets);
  r.design = make_design(r.inverse.chain, r.system, r.inverse.interpolant.J, r.targets.delta, r.targets.offset_halves, cfg.region);
  r.fidelity = encoded_transfer_fidelity(r.design);
  r.creation = state_creation_map(r.design);
  return r;
}

// ---------------------------------------------------------------------------
// Independent verification of a stored design

struct StoredDesign {
  SpinNetwork network;
  ExactValue j_prime{1};
  bool mirrored = true;
  std::optional<Permutation> involution;  // used when not mirrored
  TridiagonalChain chain;
  real J;
  real delta;
  int offset_halves = 1;
  std::vector<real> lambda_plus, lambda_minus;
  RegionMode region = RegionMode::Auto;
};

struct VerifyReport {
  bool symmetric = false;
  bool positive_couplings = false;
  bool encoding_found = false;
  bool fidelity_ok = false;
  bool targets_pst = false;
  real fidelity{0};
  real containment_residual{0};
  std::size_t controlled = 0;
  std::size_t region_size = 0;
  std::vector<std::string> failures;

  bool ok() const { return symmetric && positive_couplings && encoding_found && fidelity_ok && targets_pst; }
};

inline SymmetrizedSystem stored_system(const StoredDesign& s) {
  return s.mirrored ? symmetrize(s.network, s.j_prime, SymmetryMode::Mirror)
                    : symmetrize(s.network, s.j_prime, SymmetryMode::Auto, s.involution);
}

/// Rebuilds H, spectrum and encoding from a stored design.
inline TransferDesign realize(const StoredDesign& s) {
  return make_design(s.chain, stored_system(s), s.J, s.delta, s.offset_halves, s.region);
}

inline VerifyReport verify_design(const StoredDesign& s, unsigned precision_bits = 256) {
  PrecisionScope scope(precision_bits);
  VerifyReport rep;
  const auto sys = stored_system(s);
  rep.positive_couplings = s.J > 0;
  for (const auto& c : s.chain.couplings) rep.positive_couplings = rep.positive_couplings && c > 0;
  if (!rep.positive_couplings) rep.failures.push_back("non-positive coupling in the extension");

  const auto h = assemble(s.chain, sys, s.J);
  rep.symmetric = is_symmetric_under(h, assembled_mirror(s.chain.size(), sys));
  if (!rep.symmetric) rep.failures.push_back("H is not mirror symmetric");

  try {
    const auto t = targets_from_values(s.lambda_plus, s.lambda_minus, s.delta);
    rep.targets_pst = pst_parity_check(t) && t.offset_halves == s.offset_halves;
    const real tol = default_support_tolerance();
    const auto cp = reduce_full_support(sys.C_plus, unit_contact(sys.C_plus.rows()), tol);
    const auto cm = reduce_full_support(sys.C_minus, unit_contact(sys.C_minus.rows()), tol);
    rep.containment_residual = target_containment_residual(s.chain, cp.matrix, cm.matrix, s.J, t);
  } catch (const Error& e) {
    rep.failures.push_back(std::string("targets: ") + e.what());
  }
  if (!rep.targets_pst) rep.failures.push_back("targets do not satisfy the transfer lattice condition");

  try {
    const auto d = make_design(s.chain, sys, s.J, s.delta, s.offset_halves, s.region);
    rep.encoding_found = !d.encode.empty();
    rep.controlled = d.controlled_count();
    rep.region_size = d.region.size();
    rep.fidelity = encoded_transfer_fidelity(d).min_fidelity;
    rep.fidelity_ok = rep.fidelity >= 1 - real("1e-8");
    if (!rep.fidelity_ok) rep.failures.push_back("encoded fidelity 1 - " + to_decimal(1 - rep.fidelity, 6));
  } catch (const EmptyNullSpace& e) {
    rep.failures.push_back(e.what());
  }
  return rep;
}

inline StoredDesign to_stored(const SpinNetwork& net, const RunConfig& cfg, const ExtendResult& r) {
  StoredDesign s;
  s.network = net;
  s.j_prime = cfg.j_prime;
  s.mirrored = r.system.mirrored;
  if (!s.mirrored) s.involution = r.system.S;
  s.chain = r.inverse.chain;
  s.J = r.inverse.interpolant.J;
  s.delta = r.targets.delta;
  s.offset_halves = r.targets.offset_halves;
  s.lambda_plus = r.targets.lambda_plus;
  s.lambda_minus = r.targets.lambda_minus;
  s.region = cfg.region;
  return s;
}

// ---------------------------------------------------------------------------
// Random chains

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr const char* random_generator_name = "mt19937_64/splitmix64-v1";

/// Per-trial stream: mt19937_64 seeded with splitmix64 applied to seed and trial index.
inline std::mt19937_64 trial_generator(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ trial;
  return std::mt19937_64(splitmix64(state));
}

/// Exact coupling lo + (hi - lo) u with u = (x >> 11) / 2^53.
inline ExactValue uniform_coupling(std::mt19937_64& gen, const rational& lo, const rational& hi) {
  const std::uint64_t x = gen() >> 11;
  const rational u(bigint(x), bigint(1) << 53);
  return ExactValue(lo + (hi - lo) * u, 1);
}

inline SpinNetwork random_chain(std::uint64_t seed, std::uint64_t trial, std::size_t length = 20, const rational& lo = rational(9, 10),
                                const rational& hi = rational(11, 10)) {
  auto gen = trial_generator(seed, trial);
  SpinNetwork net = SpinNetwork::empty(length);
  for (std::size_t i = 0; i + 1 < length; ++i) net.set_coupling(i, i + 1, uniform_coupling(gen, lo, hi));
  net.input = 0;
  net.output = length - 1;
  return net;
}

struct TrialResult {
  std::size_t index = 0;
  bool success = false;
  rational shrink{0};
  real t0{0};
  real fidelity{0};
  real min_singular{0};
  real ghz{0};
  std::size_t total_length = 0;
  std::string error;
};

inline TrialResult run_trial(const RunConfig& cfg, std::size_t index, std::size_t length = 20) {
  TrialResult t;
  t.index = index;
  const auto net = random_chain(cfg.seed, index, length);
  try {
    const auto r = extend(net, cfg);
    t.success = r.succeeded();
    t.shrink = r.shrink;
    t.t0 = r.design.t0;
    t.fidelity = r.fidelity.min_fidelity;
    t.min_singular = r.creation.min_singular;
    t.ghz = r.creation.ghz;
    t.total_length = r.design.H.rows();
  } catch (const Error& e) {
    t.error = e.what();
  }
  return t;
}

inline std::string trials_csv_header() { return "trial,success,shrink,t0,fidelity,min_singular_value,ghz_fidelity,length,error\n"; }

inline std::string trial_csv_row(const TrialResult& t) {
  std::ostringstream os;
  std::string err = t.error;
  for (auto& c : err)
    if (c == ',' || c == '\n') c = ';';
  os << t.index << ',' << (t.success ? 1 : 0) << ',' << t.shrink << ',' << to_decimal(t.t0, 30) << ','
     << to_decimal(t.fidelity, 30) << ',' << to_decimal(t.min_singular, 30) << ',' << to_decimal(t.ghz, 30) << ','
     << t.total_length << ',' << err << '\n';
  return os.str();
}

}  // namespace pstx

#endif  // PSTX_DESIGN_HPP
