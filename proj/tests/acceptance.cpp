// Acceptance runner: one PASS/FAIL line per criterion. Select with --criterion N;
// without arguments every criterion runs. Exit status is nonzero if any selected
// criterion fails.
#include "support.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace pstx;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const real& x, int digits = 10) { return to_decimal(x, digits); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  failed: " << what << "\n";
    }
  }
};

ExtendResult extend_file(const std::string& name) {
  const auto nf = load_network(data_path(name));
  RunConfig cfg;
  if (nf.symmetry) cfg.symmetry = *nf.symmetry;
  return extend(nf.network, cfg, nf.targets);
}

void compare_design(Outcome& o, const ExtendResult& r, const std::vector<double>& couplings, double j, double tol) {
  const auto& chain = r.inverse.chain;
  o.detail << "  J = " << fmt(r.inverse.interpolant.J) << " (printed " << j << ")\n  couplings outer to contact:";
  for (const auto& c : chain.couplings) o.detail << " " << fmt(c);
  o.detail << "\n  printed:";
  for (double c : couplings) o.detail << " " << c;
  o.detail << "\n";
  o.require(close(r.inverse.interpolant.J, j, tol), "J within " + std::to_string(tol));
  o.require(chain.couplings.size() == couplings.size(), "chain length");
  for (std::size_t i = 0; i < std::min(couplings.size(), chain.couplings.size()); ++i)
    o.require(close(chain.couplings[i], couplings[i], tol), "coupling " + std::to_string(i + 1) + " within " + std::to_string(tol));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = extend_file("fig5.json");
  const double secs = seconds_since(start);
  compare_design(o, r, {1.39235, 0.971614, 0.840558}, 1.21745, 1e-5);
  o.detail << "  t0 = " << fmt(r.design.t0) << ", region " << r.design.region.size() << " sites, fidelity 1 - "
           << fmt(1 - r.fidelity.min_fidelity, 3) << ", " << secs << " s\n";
  o.require(close(r.design.t0, 2 * pi(), real("1e-30")), "t0 = 2 pi");
  o.require(r.design.region.size() == 5, "encoding over 5 sites");
  o.require(r.fidelity.min_fidelity >= 1 - real("1e-10"), "fidelity >= 1 - 1e-10");
  o.require(secs < 10, "runtime < 10 s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = extend_file("fig6.json");
  const double secs = seconds_since(start);
  o.detail << "  antisymmetric targets times 41:";
  for (const auto& v : r.targets.lambda_minus) o.detail << " " << round(v * 41).convert_to<long>();
  o.detail << "\n";
  compare_design(o, r, {1.868, 0.517, 1.642}, 1.201, 1e-3);
  o.detail << "  t0 = " << fmt(r.design.t0) << ", region " << r.design.region.size() << " sites, fidelity 1 - "
           << fmt(1 - r.fidelity.min_fidelity, 3) << ", " << secs << " s\n";
  o.require(close(r.design.t0, pi() * 41 / 10, real("1e-30")), "t0 = 41 pi / 10");
  o.require(r.fidelity.min_fidelity >= 1 - real("1e-10"), "fidelity >= 1 - 1e-10");
  o.require(secs < 10, "runtime < 10 s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const real a = sqrt(real(37)) / 10;
  const real b = real(3) / 8 * sqrt(real(7) / 10);
  const std::vector<std::vector<real>> rows{{real(1), -a, -b}, {real(1), a, -b}};
  const auto enc = encoding_vectors(rows, 3);
  o.require(enc.size() == 1, "one-dimensional null space");
  if (enc.empty()) return o;
  std::vector<real> expect{3 * sqrt(real(7)), real(0), 8 * sqrt(real(10))};
  const real n = norm(expect);
  for (auto& x : expect) x /= n;
  const real misalign = abs(abs(dot(enc[0], expect)) - 1);
  const real cross = std::max(real(abs(dot(enc[0], rows[0]))), real(abs(dot(enc[0], rows[1]))));
  o.detail << "  encode = (" << fmt(enc[0][0]) << ", " << fmt(enc[0][1]) << ", " << fmt(enc[0][2]) << "), 1 - |<v|expected>| = "
           << fmt(misalign, 3) << ", max cross product " << fmt(cross, 3) << "\n";
  o.require(misalign < real("1e-20"), "proportional to 3 sqrt7 |1> + 8 sqrt10 |3>");
  o.require(cross < real("1e-20"), "cross inner products < 1e-20");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = extend_file("uniform42.json");
  const double secs = seconds_since(start);
  o.detail << "  shrink " << to_string(r.shrink) << ", N_A = " << r.inverse.chain.size() << ", fidelity 1 - "
           << fmt(1 - r.fidelity.min_fidelity, 3) << ", min singular value 1 - " << fmt(1 - r.creation.min_singular, 3)
           << ", GHZ " << fmt(r.creation.ghz) << ", " << secs << " s\n";
  o.require(r.inverse.certificate.ok(), "reconstruction conditions certified");
  o.require(r.fidelity.min_fidelity >= 1 - real("1e-8"), "fidelity >= 1 - 1e-8");
  o.require(r.creation.min_singular >= 1 - real("1e-4") && r.creation.min_singular <= 1 + real("1e-30"),
            "min singular value in [1 - 1e-4, 1]");
  o.require(secs < 60, "runtime < 60 s");
  return o;
}

Outcome criterion5() {
  Outcome o;
  RunConfig cfg;
  cfg.seed = 1;
  cfg.trials = 20;
  const auto start = Clock::now();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const auto t = run_trial(cfg, i, 20);
    const bool good = t.success && t.shrink >= rational(1, 8) && t.fidelity >= 1 - real("1e-8") && t.ghz >= real("0.999") &&
                      t.total_length == 120;
    ok += good;
    o.detail << "  trial " << i << ": shrink " << t.shrink << ", fidelity 1 - " << fmt(1 - t.fidelity, 3) << ", GHZ "
             << fmt(t.ghz, 8) << ", length " << t.total_length << (t.error.empty() ? "" : ", " + t.error) << "\n";
    o.require(good, "trial " + std::to_string(i));
  }
  const double secs = seconds_since(start);
  o.detail << "  " << ok << "/" << cfg.trials << " trials, " << secs << " s (generator " << random_generator_name << ")\n";
  o.require(secs < 600, "runtime < 10 min");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto net = dark_network();
  const auto sys = symmetrize(net, ExactValue(1));
  const auto rep = verify_distinct_subspace_spectra(block(sys.C_plus), block(sys.C_minus));
  o.detail << "  shared:";
  for (const auto& v : rep.shared) o.detail << " " << fmt(v);
  o.detail << "\n";
  o.require(rep.shared.size() == 2, "two shared eigenvalues");
  if (rep.shared.size() == 2) {
    o.require(close(rep.shared[0], sqrt(real(2)), real("1e-30")), "+sqrt2 shared");
    o.require(close(rep.shared[1], -sqrt(real(2)), real("1e-30")), "-sqrt2 shared");
  }
  bool fatal = false;
  try {
    extend(net, RunConfig{});
  } catch (const SharedSpectraFatal&) {
    fatal = true;
  }
  o.require(fatal, "extend reports SharedSpectraFatal");
  const std::string cmd = std::string(PSTX_CLI_PATH) + " extend " + data_path("dark_state.json") + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.detail << "  pstx extend exit code " << code << "\n";
  o.require(code != 0, "extend exits nonzero");
  return o;
}

// ---------------------------------------------------------------------------
// Property suites

struct Suite {
  std::string name;
  std::function<std::pair<std::size_t, std::string>(Outcome&)> run;  // cases, summary
};

std::pair<std::size_t, std::string> eq1_suite(Outcome& o) {
  std::mt19937_64 gen(1001);
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  std::uniform_real_distribution<double> u(-3, 3), jj(0.1, 2);
  real worst(0);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_chain(gen, dim(gen));
    const auto c = random_symmetric(gen, dim(gen));
    std::vector<real> zs;
    for (int k = 0; k < 5; ++k) zs.push_back(real(u(gen)));
    worst = std::max(worst, verify_identity_eq1(a, c, real(jj(gen)), zs));
  }
  o.require(worst < real("1e-25"), "block identity residual < 1e-25");
  return {100, "worst residual " + fmt(worst, 3)};
}

std::pair<std::size_t, std::string> round_trip_suite(Outcome& o) {
  std::mt19937_64 gen(1002);
  std::uniform_int_distribution<std::size_t> len(1, 10);
  real worst(0);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_chain(gen, len(gen), 0.1, 2, -1, 1);
    const auto polys = a.leading_char_polys();
    const auto b = reconstruct_tridiagonal(to_spectral_weights(polys[a.size() - 1], polys.back()));
    for (std::size_t k = 0; k < a.size(); ++k)
      worst = std::max(worst, real(abs(b.fields[k] - a.fields[k]) / std::max(real(1), real(abs(a.fields[k])))));
    for (std::size_t k = 0; k + 1 < a.size(); ++k) worst = std::max(worst, real(abs(b.couplings[k] - a.couplings[k]) / a.couplings[k]));
  }
  o.require(worst < real("1e-15"), "round trip < 1e-15 relative");
  return {200, "worst relative error " + fmt(worst, 3)};
}

std::pair<std::size_t, std::string> weights_suite(Outcome& o) {
  std::mt19937_64 gen(1003);
  std::uniform_real_distribution<double> u(-3, 3);
  std::size_t agree = 0, interlaced = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<real> qr, pr;
    for (int k = 0; k < 4; ++k) qr.push_back(real(u(gen)));
    std::sort(qr.begin(), qr.end());
    // Even cases place each root of P inside a gap of Q; odd cases are unconstrained.
    for (int k = 0; k < 3; ++k) pr.push_back(i % 2 == 0 ? real((qr[k] + qr[k + 1]) / 2) : real(u(gen)));
    const auto q = Poly::from_roots(qr), p = Poly::from_roots(pr);
    const bool strict = check_strict_interlacing(q, p).ok;
    bool positive = true;
    try {
      to_spectral_weights(p, q);
    } catch (const NonPositiveWeight&) {
      positive = false;
    }
    agree += strict == positive;
    interlaced += strict;
  }
  o.require(agree == 100, "interlacing iff positive weights");
  return {100, std::to_string(agree) + " agree, " + std::to_string(interlaced) + " interlaced"};
}

std::pair<std::size_t, std::string> lemma8_suite(Outcome& o) {
  std::mt19937_64 gen(1004);
  std::uniform_real_distribution<double> gap(0.05, 1), eps_u(0.01, 3);
  std::size_t good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 5;
    std::vector<real> pts;
    real x(2);
    for (std::size_t i = 0; i < 2 * n; ++i) pts.push_back(x -= real(gap(gen)));
    const real eps(eps_u(gen));
    Matrix<real> m(2 * n, 2 * n);
    std::vector<real> rhs(2 * n);
    for (std::size_t r = 0; r < 2 * n; ++r) {
      const real s = r % 2 == 0 ? eps : real(-eps);
      real zp(1);
      for (std::size_t i = 0; i < n; ++i) {
        m(r, i) = zp;
        m(r, n + i) = -s * zp;
        zp *= pts[r];
      }
      rhs[r] = s * zp;
    }
    const auto c = solve_full_pivot(m, rhs, real("1e-60"));
    std::vector<real> qc(c.begin() + static_cast<long>(n), c.end());
    qc.push_back(real(1));
    const auto roots = isolate_real_roots(Poly(qc)).values();
    bool ok = roots.size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = roots[i] < pts[2 * i] && roots[i] > pts[2 * i + 1];
    good += ok;
  }
  o.require(good == 100, "one root of Q_A in every (lambda-_i, lambda+_i)");
  return {100, std::to_string(good) + " localised"};
}

std::pair<std::size_t, std::string> cauchy_suite(Outcome& o) {
  std::mt19937_64 gen(1005);
  std::uniform_real_distribution<double> u(-4, 4);
  real worst(0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<real> lambda, eta;
    for (std::size_t i = 0; i < n; ++i) {
      lambda.push_back(real(u(gen)));
      eta.push_back(real(u(gen)));
    }
    const real f = cauchy_determinant_formula(lambda, eta);
    worst = std::max(worst, real(abs(f - cauchy_determinant_direct(lambda, eta)) / std::max(real(1), f)));
  }
  o.require(worst < real("1e-20"), "Cauchy formula vs determinant < 1e-20");
  return {100, "worst relative difference " + fmt(worst, 3)};
}

std::pair<std::size_t, std::string> parity_suite(Outcome& o) {
  std::mt19937_64 gen(1006);
  std::uniform_int_distribution<int> w(5, 20), f(-5, 5), len(1, 6);
  std::size_t emitted = 0, good = 0;
  for (int trial = 0; emitted < 100 && trial < 400; ++trial) {
    std::vector<ExactValue> cs;
    const int n = len(gen);
    for (int i = 0; i < n; ++i) cs.push_back(ExactValue(rational(w(gen), 10)));
    auto net = chain(cs);
    if (trial % 3 == 0)
      for (auto& x : net.fields) x = ExactValue(rational(f(gen), 10));
    const auto sys = symmetrize(net, ExactValue(1), SymmetryMode::Mirror);
    const auto cp = block(sys.C_plus), cm = block(sys.C_minus);
    try {
      const auto t = pair_pinning_select(cp, cm, real(1) / (2 << (trial % 3)), pinning_mode_for(classify_field_free_even(sys)));
      ++emitted;
      good += pst_parity_check(t) && mu_alternation_check(cp, cm, t);
    } catch (const SharedSpectraFatal&) {
    }
  }
  o.require(emitted >= 100 && good == emitted, "every emitted spectrum passes the parity check");
  return {emitted, std::to_string(good) + " of " + std::to_string(emitted) + " spectra pass"};
}

std::pair<std::size_t, std::string> slope_suite(Outcome& o) {
  std::mt19937_64 gen(1007);
  std::uniform_real_distribution<double> asym(0.5, 1.5);
  double lo = 1e9, hi = -1e9;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 3;
    const auto c = random_symmetric(gen, n);
    const std::size_t which = static_cast<std::size_t>(trial) % n;
    const real a(asym(gen)), b(asym(gen));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    real eps("1e-3");
    for (int step = 0; step < 4; ++step, eps /= 2) {
      const double x = std::log(eps.convert_to<double>());
      const double y = std::log(flanking_pair_error(c, which, a * eps, b * eps).convert_to<double>());
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  o.require(lo >= 1.8 && hi <= 2.2, "slope in [1.8, 2.2]");
  std::ostringstream s;
  s << "slopes in [" << lo << ", " << hi << "]";
  return {100, s.str()};
}

Outcome criterion7() {
  Outcome o;
  const auto start = Clock::now();
  const std::vector<Suite> suites{{"block determinant identity", eq1_suite},
                                  {"reconstruction round trip", round_trip_suite},
                                  {"interlacing and positive weights", weights_suite},
                                  {"pair pinning root localisation", lemma8_suite},
                                  {"Cauchy determinant", cauchy_suite},
                                  {"perfect-transfer parity of pinned spectra", parity_suite},
                                  {"flanking pair error slope", slope_suite}};
  for (const auto& s : suites) {
    const auto [cases, summary] = s.run(o);
    o.detail << "  " << s.name << ": " << cases << " cases, " << summary << "\n";
    o.require(cases >= 100, s.name + " has at least 100 cases");
  }
  const double secs = seconds_since(start);
  o.detail << "  " << secs << " s\n";
  o.require(secs < 300, "runtime < 5 min");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  PrecisionScope scope(256);
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) selected.push_back(std::atoi(argv[++i]));
    else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"six-vertex example reproduction", criterion1}, {"star network reproduction", criterion2},
      {"printed encoding vector", criterion3},         {"uniform chain of 42", criterion4},
      {"random chains", criterion5},                   {"dark state rejection", criterion6},
      {"property suites", criterion7}};

  bool all = true;
  for (int c : selected) {
    if (c < 1 || c > 7) {
      std::cerr << "no criterion " << c << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = criteria[c - 1].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "  exception: " << e.what() << "\n";
    }
    std::cout << o.detail.str() << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << criteria[c - 1].first << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
