#ifndef PSTX_IO_HPP
#define PSTX_IO_HPP

#include "pstx/design.hpp"
#include "pstx/errors.hpp"
#include "pstx/exact.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pstx {

using json = nlohmann::ordered_json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

inline ExactValue exact_from_json(const json& v) {
  if (v.is_string()) return ExactValue::parse(v.get<std::string>());
  if (v.is_number_integer()) return ExactValue(v.get<long long>());
  if (v.is_number()) return ExactValue::from_double(v.get<double>());
  throw ParseError("expected a number or an exact value string, got " + v.dump());
}

inline real real_from_json(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    // Plain decimals go straight to MPFR; anything else is an exact expression.
    if (s.find_first_of("/(*s") == std::string::npos) return parse_real(s);
  }
  return exact_from_json(v).to_real();
}

inline std::size_t index_from_json(const json& v, std::size_t n, const char* what) {
  if (!v.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
  const long long i = v.get<long long>();
  if (i < 1 || static_cast<std::size_t>(i) > n) throw ParseError(std::string(what) + " out of range: " + std::to_string(i));
  return static_cast<std::size_t>(i - 1);
}

// ---------------------------------------------------------------------------
// Network files

struct NetworkFile {
  SpinNetwork network;
  std::optional<TargetRequest> targets;
  std::optional<ExactValue> j_prime;
  std::optional<SymmetryMode> symmetry;
  std::optional<Permutation> involution;
};

inline SpinNetwork network_from_json(const json& j) {
  try {
    const std::size_t n = j.at("n").get<std::size_t>();
    SpinNetwork net = SpinNetwork::empty(n);
    for (const auto& e : j.at("edges")) {
      const auto a = index_from_json(e.at("i"), n, "edge endpoint");
      const auto b = index_from_json(e.at("j"), n, "edge endpoint");
      net.set_coupling(a, b, exact_from_json(e.at("w")));
    }
    if (j.contains("fields")) {
      const auto& f = j.at("fields");
      if (f.size() != n) throw ParseError("fields must have n entries");
      for (std::size_t i = 0; i < n; ++i) net.fields[i] = exact_from_json(f[i]);
    }
    net.input = index_from_json(j.at("in"), n, "in");
    net.output = index_from_json(j.at("out"), n, "out");
    return net;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

inline json network_to_json(const SpinNetwork& net) {
  json j;
  j["n"] = net.n;
  j["edges"] = json::array();
  for (const auto& [key, w] : net.couplings) j["edges"].push_back({{"i", key.first + 1}, {"j", key.second + 1}, {"w", w.str()}});
  j["fields"] = json::array();
  for (const auto& f : net.fields) j["fields"].push_back(f.str());
  j["in"] = net.input + 1;
  j["out"] = net.output + 1;
  return j;
}

inline Permutation permutation_from_json(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw ParseError("involution must list all n images");
  Permutation p;
  for (const auto& v : j) p.push_back(index_from_json(v, n, "involution image"));
  return p;
}

inline NetworkFile load_network(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  NetworkFile f;
  f.network = network_from_json(j);
  try {
    if (j.contains("targets")) {
      const auto& t = j.at("targets");
      TargetRequest req;
      for (const auto& v : t.at("plus")) req.plus.push_back(real_from_json(v));
      for (const auto& v : t.at("minus")) req.minus.push_back(real_from_json(v));
      req.delta = real_from_json(t.at("delta"));
      f.targets = req;
    }
    if (j.contains("jprime")) f.j_prime = exact_from_json(j.at("jprime"));
    if (j.contains("symmetry")) {
      const auto s = j.at("symmetry").get<std::string>();
      if (s == "auto") f.symmetry = SymmetryMode::Auto;
      else if (s == "mirror") f.symmetry = SymmetryMode::Mirror;
      else throw ParseError("symmetry must be \"auto\" or \"mirror\"");
    }
    if (j.contains("involution")) f.involution = permutation_from_json(j.at("involution"), f.network.n);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Designs

inline std::string dec(const real& x) { return to_decimal(x, static_cast<int>(digits10_for_bits(active_precision_bits()))); }

inline json reals_to_json(const std::vector<real>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(dec(x));
  return a;
}

inline std::vector<real> reals_from_json(const json& a) {
  std::vector<real> v;
  for (const auto& x : a) v.push_back(real_from_json(x));
  return v;
}

inline const char* region_name(RegionMode m) {
  switch (m) {
    case RegionMode::NA: return "NA";
    case RegionMode::NAPlusOne: return "NA+1";
    case RegionMode::Auto: break;
  }
  return "auto";
}

inline RegionMode region_from_name(const std::string& s) {
  if (s == "auto") return RegionMode::Auto;
  if (s == "NA") return RegionMode::NA;
  if (s == "NA+1") return RegionMode::NAPlusOne;
  throw ParseError("region must be auto, NA or NA+1");
}

inline json targets_to_json(const TargetSpectrum& t) {
  json j;
  j["delta"] = dec(t.delta);
  j["offset_halves"] = t.offset_halves;
  j["t0"] = dec(t.t0);
  auto list = [&](const std::vector<long>& ks, const char* subspace) {
    json a = json::array();
    for (auto k : ks) {
      const long parity = ((k % 2) + 2) % 2;
      a.push_back({{"n", (k - parity) / 2}, {"parity", parity}, {"subspace", subspace}, {"value", dec(t.value(k))}});
    }
    return a;
  };
  j["plus"] = list(t.k_plus, "+");
  j["minus"] = list(t.k_minus, "-");
  return j;
}

inline json fidelity_report_json(const TransferDesign& d, const FidelityReport& f, const CreationReport& c) {
  json j;
  j["t0"] = dec(d.t0);
  j["phase"] = {{"re", dec(f.phase.re)}, {"im", dec(f.phase.im)}};
  j["per_vector_fidelity"] = reals_to_json(f.per_vector);
  j["min_singular_value"] = dec(c.min_singular);
  j["ghz_F"] = dec(c.ghz);
  std::vector<real> ctrl, unctrl;
  for (std::size_t k = 0; k < d.spectrum.values.size(); ++k) (d.controlled[k] ? ctrl : unctrl).push_back(d.spectrum.values[k]);
  j["spectrum"] = {{"controlled", reals_to_json(ctrl)}, {"uncontrolled", reals_to_json(unctrl)}};
  return j;
}

inline json design_to_json(const SpinNetwork& net, const RunConfig& cfg, const ExtendResult& r) {
  json j;
  j["format"] = "pstx-design";
  j["precision_bits"] = active_precision_bits();
  j["network"] = network_to_json(net);
  j["jprime"] = cfg.j_prime.str();
  j["mirrored"] = r.system.mirrored;
  if (!r.system.mirrored) {
    json p = json::array();
    for (std::size_t v = 0; v < net.n; ++v) p.push_back(r.system.S[v] + 1);
    j["involution"] = p;
  }
  j["region"] = region_name(cfg.region);
  j["J"] = dec(r.inverse.interpolant.J);
  j["chain"] = {{"order", "outer-to-contact"},
                {"couplings", reals_to_json(r.inverse.chain.couplings)},
                {"fields", reals_to_json(r.inverse.chain.fields)}};
  j["targets"] = targets_to_json(r.targets);
  j["shrink"] = to_string(r.shrink);
  j["attempts"] = r.attempts;
  j["interpolant"] = {{"P", reals_to_json(r.inverse.interpolant.P.coeffs())},
                      {"Q", reals_to_json(r.inverse.interpolant.Q.coeffs())},
                      {"J", dec(r.inverse.interpolant.J)},
                      {"max_residual", dec(r.inverse.interpolant.max_residual)},
                      {"half_size", r.inverse.half_size}};
  j["weights"] = {{"nodes", reals_to_json(r.inverse.weights.nodes)}, {"weights", reals_to_json(r.inverse.weights.weights)}};
  j["certificate"] = {{"real_roots", r.inverse.certificate.real_roots},
                      {"j_positive", r.inverse.certificate.j_positive},
                      {"strict_interlacing", r.inverse.certificate.strict_interlacing}};
  j["region_size"] = r.design.region.size();
  json enc = json::array();
  for (const auto& v : r.design.encode) {
    std::vector<real> local;
    for (auto i : r.design.region) local.push_back(v[i]);
    enc.push_back(reals_to_json(local));
  }
  j["encode"] = enc;
  j["containment_residual"] = dec(r.containment_residual);
  j["fidelity_report"] = fidelity_report_json(r.design, r.fidelity, r.creation);
  j["log"] = r.log;
  return j;
}

inline StoredDesign design_from_json(const json& j) {
  try {
    StoredDesign s;
    s.network = network_from_json(j.at("network"));
    if (j.contains("jprime")) s.j_prime = exact_from_json(j.at("jprime"));
    s.mirrored = j.value("mirrored", true);
    if (j.contains("involution")) s.involution = permutation_from_json(j.at("involution"), s.network.n);
    if (j.contains("region")) s.region = region_from_name(j.at("region").get<std::string>());
    s.J = real_from_json(j.at("J"));
    s.chain.couplings = reals_from_json(j.at("chain").at("couplings"));
    s.chain.fields = reals_from_json(j.at("chain").at("fields"));
    const auto& t = j.at("targets");
    s.delta = real_from_json(t.at("delta"));
    s.offset_halves = t.value("offset_halves", 1);
    for (const auto& e : t.at("plus")) s.lambda_plus.push_back(real_from_json(e.is_object() ? e.at("value") : e));
    for (const auto& e : t.at("minus")) s.lambda_minus.push_back(real_from_json(e.is_object() ? e.at("value") : e));
    return s;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

inline StoredDesign load_design(const std::string& path) {
  try {
    return design_from_json(json::parse(read_text(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string spectrum_csv(const TransferDesign& d) {
  std::ostringstream os;
  os << "value,subspace,controlled\n";
  for (std::size_t k = 0; k < d.spectrum.values.size(); ++k)
    os << dec(d.spectrum.values[k]) << ',' << (d.spectrum.sector[k] > 0 ? '+' : '-') << ',' << (d.controlled[k] ? 1 : 0) << '\n';
  return os.str();
}

inline json creation_report_json(const TransferDesign& d, const CreationReport& c) {
  json j;
  j["t0"] = dec(d.t0);
  j["out_sites"] = d.out_sites.size();
  j["in_sites"] = d.in_sites.size();
  j["singular_values"] = reals_to_json(c.singular_values);
  j["min_singular_value"] = dec(c.min_singular);
  j["ghz_F"] = dec(c.ghz);
  return j;
}

}  // namespace pstx

#endif  // PSTX_IO_HPP
