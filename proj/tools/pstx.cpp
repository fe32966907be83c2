#include "pstx/pstx.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

enum Exit { kOk = 0, kFailed = 1, kShared = 2, kFloor = 3 };

struct Options {
  unsigned precision = 256;
  std::string jprime = "1";
  std::string region = "auto";
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::size_t length = 20;
  std::string out;
};

pstx::RunConfig make_config(const Options& o) {
  pstx::RunConfig cfg;
  cfg.precision_bits = o.precision;
  cfg.j_prime = pstx::ExactValue::parse(o.jprime);
  cfg.region = pstx::region_from_name(o.region);
  cfg.seed = o.seed;
  cfg.trials = o.trials;
  cfg.check();
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else pstx::write_text(path, text);
}

int cmd_extend(const std::string& file, const Options& o) {
  auto cfg = make_config(o);
  const auto nf = pstx::load_network(file);
  if (nf.j_prime && o.jprime == "1") cfg.j_prime = *nf.j_prime;
  if (nf.symmetry) cfg.symmetry = *nf.symmetry;
  if (nf.involution) cfg.involution = nf.involution;
  pstx::PrecisionScope scope(cfg.precision_bits);
  try {
    const auto r = pstx::extend(nf.network, cfg, nf.targets);
    emit(o.out, pstx::design_to_json(nf.network, cfg, r).dump(2) + "\n");
    for (const auto& line : r.log) std::cerr << line << "\n";
    std::cerr << "N_A = " << r.inverse.chain.size() << ", J = " << pstx::to_decimal(r.inverse.interpolant.J, 12)
              << ", t0 = " << pstx::to_decimal(r.design.t0, 12) << ", region " << r.design.region.size()
              << ", fidelity 1 - " << pstx::to_decimal(1 - r.fidelity.min_fidelity, 3) << "\n";
    return r.succeeded() ? kOk : kFailed;
  } catch (const pstx::SharedSpectraFatal& e) {
    std::cerr << e.what() << "\n";
    const auto sys = pstx::symmetrize(nf.network, cfg.j_prime, cfg.symmetry, cfg.involution);
    const auto tol = pstx::default_support_tolerance();
    const auto rep = pstx::verify_distinct_subspace_spectra(
        pstx::reduce_full_support(sys.C_plus, pstx::unit_contact(sys.C_plus.rows()), tol),
        pstx::reduce_full_support(sys.C_minus, pstx::unit_contact(sys.C_minus.rows()), tol));
    std::cerr << "SharedEigenvalues:";
    for (const auto& v : rep.shared) std::cerr << " " << pstx::to_decimal(v, 20);
    std::cerr << "\n";
    return kShared;
  } catch (const pstx::ShrinkFloorReached& e) {
    std::cerr << e.what() << "\n";
    return kFloor;
  }
}

int cmd_verify(const std::string& file, const Options& o) {
  pstx::PrecisionScope scope(o.precision);
  const auto rep = pstx::verify_design(pstx::load_design(file), o.precision);
  std::cout << "symmetric " << rep.symmetric << "\npositive_couplings " << rep.positive_couplings << "\nencoding "
            << rep.encoding_found << " (region " << rep.region_size << ")\ntargets_pst " << rep.targets_pst
            << "\ncontrolled " << rep.controlled << "\nfidelity " << pstx::to_decimal(rep.fidelity, 30)
            << "\ncontainment_residual " << pstx::to_decimal(rep.containment_residual, 6) << "\n";
  for (const auto& f : rep.failures) std::cout << "FAIL " << f << "\n";
  std::cout << (rep.ok() ? "OK" : "REJECTED") << "\n";
  return rep.ok() ? kOk : kFailed;
}

int cmd_random_trials(const Options& o) {
  const auto cfg = make_config(o);
  pstx::PrecisionScope scope(cfg.precision_bits);
  std::string csv = "# generator " + std::string(pstx::random_generator_name) + ", seed " + std::to_string(cfg.seed) + "\n";
  csv += pstx::trials_csv_header();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const auto t = pstx::run_trial(cfg, i, o.length);
    ok += t.success;
    csv += pstx::trial_csv_row(t);
    std::cerr << "trial " << i << (t.success ? " ok" : " failed") << "\n";
  }
  emit(o.out, csv);
  std::cerr << "success " << ok << "/" << cfg.trials << "\n";
  return kOk;
}

int cmd_spectrum(const std::string& file, const Options& o) {
  pstx::PrecisionScope scope(o.precision);
  const auto d = pstx::realize(pstx::load_design(file));
  emit(o.out, pstx::spectrum_csv(d));
  return kOk;
}

int cmd_creation(const std::string& file, const Options& o) {
  pstx::PrecisionScope scope(o.precision);
  const auto d = pstx::realize(pstx::load_design(file));
  emit(o.out, pstx::creation_report_json(d, pstx::state_creation_map(d)).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encoded state transfer: chain extensions for fixed spin networks"};
  app.require_subcommand(1);
  Options o;
  std::string file;
  app.add_option("--precision", o.precision, "working precision in bits")->check(CLI::Range(128u, 8192u));
  app.add_option("--out", o.out, "output file (default stdout)");

  auto* extend = app.add_subcommand("extend", "design an extension for a network file");
  extend->add_option("network", file, "network JSON")->required()->check(CLI::ExistingFile);
  extend->add_option("--jprime", o.jprime, "coupling between the network and its mirror");
  extend->add_option("--region", o.region, "encoding region: auto, NA or NA+1");
  extend->add_option("--out", o.out, "design JSON output");

  auto* verify = app.add_subcommand("verify", "recheck a stored design");
  verify->add_option("design", file, "design JSON")->required()->check(CLI::ExistingFile);

  auto* trials = app.add_subcommand("random-trials", "extend seeded random chains");
  trials->add_option("--seed", o.seed, "base seed");
  trials->add_option("--trials", o.trials, "number of trials");
  trials->add_option("--length", o.length, "chain length");
  trials->add_option("--out", o.out, "summary CSV output");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue table of a stored design");
  spectrum->add_option("design", file, "design JSON")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--out", o.out, "CSV output");

  auto* creation = app.add_subcommand("creation", "state creation singular values of a stored design");
  creation->add_option("design", file, "design JSON")->required()->check(CLI::ExistingFile);
  creation->add_option("--out", o.out, "JSON output");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*extend) return cmd_extend(file, o);
    if (*verify) return cmd_verify(file, o);
    if (*trials) return cmd_random_trials(o);
    if (*spectrum) return cmd_spectrum(file, o);
    if (*creation) return cmd_creation(file, o);
  } catch (const pstx::Error& e) {
    std::cerr << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kFailed;
}
