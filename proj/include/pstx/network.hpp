#ifndef PSTX_NETWORK_HPP
#define PSTX_NETWORK_HPP

#include "pstx/errors.hpp"
#include "pstx/exact.hpp"
#include "pstx/linalg.hpp"
#include "pstx/matrix.hpp"
#include "pstx/numeric.hpp"
#include "pstx/spectral.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pstx {

using Permutation = std::vector<std::size_t>;

/// Weighted coupling graph with on-site fields. Vertices are 0-based here;
/// the JSON layer converts from the 1-based file format.
struct SpinNetwork {
  std::size_t n = 0;
  std::map<std::pair<std::size_t, std::size_t>, ExactValue> couplings;  // key (i, j) with i < j
  std::vector<ExactValue> fields;
  std::size_t input = 0;
  std::size_t output = 0;

  static SpinNetwork empty(std::size_t n) {
    SpinNetwork net;
    net.n = n;
    net.fields.assign(n, ExactValue(0));
    return net;
  }

  void set_coupling(std::size_t i, std::size_t j, const ExactValue& w) {
    if (i == j) throw InvalidNetwork("self coupling at vertex " + std::to_string(i + 1));
    if (i > j) std::swap(i, j);
    if (w.is_zero()) couplings.erase({i, j});
    else couplings[{i, j}] = w;
  }

  ExactValue coupling(std::size_t i, std::size_t j) const {
    if (i == j) return ExactValue(0);
    if (i > j) std::swap(i, j);
    auto it = couplings.find({i, j});
    return it == couplings.end() ? ExactValue(0) : it->second;
  }

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [key, w] : couplings) {
      adj[key.first].push_back(key.second);
      adj[key.second].push_back(key.first);
    }
    return adj;
  }

  /// Breadth-first distances from `src` (n means unreachable).
  std::vector<std::size_t> distances_from(std::size_t src) const {
    const auto adj = adjacency();
    std::vector<std::size_t> dist(n, n);
    std::deque<std::size_t> todo{src};
    dist[src] = 0;
    while (!todo.empty()) {
      const auto v = todo.front();
      todo.pop_front();
      for (auto u : adj[v])
        if (dist[u] == n) {
          dist[u] = dist[v] + 1;
          todo.push_back(u);
        }
    }
    return dist;
  }

  void validate() const {
    if (n == 0) throw InvalidNetwork("network has no vertices");
    if (fields.size() != n) throw InvalidNetwork("expected " + std::to_string(n) + " fields");
    if (input >= n || output >= n) throw InvalidNetwork("input/output vertex out of range");
    if (input == output && n > 1) throw InvalidNetwork("input and output coincide");
    for (const auto& [key, w] : couplings) {
      if (key.first >= key.second || key.second >= n) throw InvalidNetwork("bad coupling index");
      if (w.is_zero()) throw InvalidNetwork("zero coupling stored");
    }
    const auto dist = distances_from(0);
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] == n) throw InvalidNetwork("vertex " + std::to_string(v + 1) + " is disconnected");
  }
};

inline Matrix<real> build_hamiltonian(const SpinNetwork& net) {
  Matrix<real> h(net.n, net.n);
  for (std::size_t i = 0; i < net.n; ++i) h(i, i) = net.fields[i].to_real();
  for (const auto& [key, w] : net.couplings) h(key.first, key.second) = h(key.second, key.first) = w.to_real();
  return h;
}

// ---------------------------------------------------------------------------
// Mirror involutions

inline bool is_mirror_involution(const SpinNetwork& net, const Permutation& s) {
  if (s.size() != net.n) return false;
  for (std::size_t v = 0; v < net.n; ++v) {
    if (s[v] >= net.n || s[s[v]] != v) return false;
    if (!(net.fields[v] == net.fields[s[v]])) return false;
  }
  if (s[net.input] != net.output) return false;
  for (const auto& [key, w] : net.couplings)
    if (!(net.coupling(s[key.first], s[key.second]) == w)) return false;
  return true;
}

namespace detail {

class InvolutionSearch {
 public:
  InvolutionSearch(const SpinNetwork& net, std::size_t limit) : net_(net), limit_(limit) {
    const auto adj = net.adjacency();
    signature_.resize(net.n);
    for (std::size_t v = 0; v < net.n; ++v) {
      std::vector<std::string> ws;
      for (auto u : adj[v]) ws.push_back(net.coupling(u, v).str());
      std::sort(ws.begin(), ws.end());
      std::string sig = net.fields[v].str();
      for (const auto& w : ws) sig += "|" + w;
      signature_[v] = sig;
    }
    const auto dist = net.distances_from(net.input);
    order_.resize(net.n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  }

  std::vector<Permutation> run() {
    const std::size_t none = net_.n;
    image_.assign(net_.n, none);
    if (signature_[net_.input] != signature_[net_.output] || net_.input == net_.output) return {};
    image_[net_.input] = net_.output;
    image_[net_.output] = net_.input;
    if (consistent(net_.input) && consistent(net_.output)) recurse();
    std::sort(found_.begin(), found_.end());
    return found_;
  }

 private:
  bool consistent(std::size_t v) const {
    const std::size_t none = net_.n;
    for (std::size_t w = 0; w < net_.n; ++w) {
      if (image_[w] == none) continue;
      if (!(net_.coupling(v, w) == net_.coupling(image_[v], image_[w]))) return false;
    }
    return true;
  }

  void recurse() {
    if (found_.size() >= limit_) return;
    const std::size_t none = net_.n;
    std::size_t next = none;
    for (auto v : order_)
      if (image_[v] == none) {
        next = v;
        break;
      }
    if (next == none) {
      if (is_mirror_involution(net_, image_)) found_.push_back(image_);
      return;
    }
    for (auto u : order_) {
      if (u != next && image_[u] != none) continue;
      if (signature_[u] != signature_[next]) continue;
      image_[next] = u;
      image_[u] = next;
      if (consistent(next) && consistent(u)) recurse();
      image_[next] = none;
      image_[u] = none;
    }
  }

  const SpinNetwork& net_;
  std::size_t limit_;
  std::vector<std::string> signature_;
  std::vector<std::size_t> order_;
  Permutation image_;
  std::vector<Permutation> found_;
};

}  // namespace detail

/// All involutive automorphisms (exact weights and fields) exchanging input and output.
inline std::vector<Permutation> find_mirror_involutions(const SpinNetwork& net, std::size_t limit = 64) {
  return detail::InvolutionSearch(net, limit).run();
}

// ---------------------------------------------------------------------------
// Fully supported reduction

struct SupportedBlock {
  Matrix<real> matrix;         // contact is basis vector 0 unless `unchanged` with a custom contact
  std::vector<real> contact;   // contact vector in the reduced basis
  Matrix<real> basis;          // original_dim x dim, columns span the kept subspace
  std::vector<std::pair<real, std::vector<real>>> dropped;  // eigenpairs in original coordinates

  std::size_t dim() const { return matrix.rows(); }
};

/// Restricts `block` to the cyclic subspace generated by `contact`. Eigenvectors
/// with |<contact|v>| <= tol are dropped; inside a degenerate eigenspace only the
/// direction of the contact's projection is kept.
inline SupportedBlock reduce_full_support(const Matrix<real>& block, const std::vector<real>& contact, const real& tol) {
  using std::abs;
  const std::size_t n = block.rows();
  if (contact.size() != n) throw std::invalid_argument("reduce_full_support: contact size mismatch");
  SupportedBlock out;
  if (n == 0) return out;
  const auto eig = symmetric_eigen(block);
  real scale(1);
  for (const auto& v : eig.values) scale = std::max(scale, real(abs(v)));
  const real group_tol = precision_fraction(0.75) * scale;

  std::vector<real> kept_values;
  std::vector<std::vector<real>> kept_vectors;
  std::vector<real> kept_overlaps;
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && eig.values[stop] - eig.values[stop - 1] <= group_tol) ++stop;
    std::vector<std::vector<real>> group;
    real mean(0);
    for (std::size_t k = start; k < stop; ++k) {
      group.push_back(eig.vectors.column(k));
      mean += eig.values[k];
    }
    mean /= static_cast<long>(stop - start);
    std::vector<real> proj(n, real(0));
    for (const auto& v : group) {
      const real o = dot(v, contact);
      for (std::size_t i = 0; i < n; ++i) proj[i] += o * v[i];
    }
    const real pn = norm(proj);
    if (pn <= tol) {
      for (std::size_t k = start; k < stop; ++k) out.dropped.emplace_back(eig.values[k], eig.vectors.column(k));
    } else {
      for (auto& x : proj) x /= pn;
      kept_values.push_back(stop - start == 1 ? eig.values[start] : mean);
      kept_vectors.push_back(proj);
      kept_overlaps.push_back(pn);
      if (stop - start > 1) {
        std::vector<std::vector<real>> seeds{proj};
        for (const auto& v : group) seeds.push_back(v);
        auto ortho = orthonormalize(seeds, precision_fraction(0.5));
        for (std::size_t k = 1; k < ortho.size(); ++k) out.dropped.emplace_back(mean, ortho[k]);
      }
    }
    start = stop;
  }
  for (std::size_t k = 1; k < kept_values.size(); ++k)
    if (kept_values[k] - kept_values[k - 1] <= precision_fraction(0.5) * scale)
      throw DegenerateSupport("supported eigenvalues " + to_decimal(kept_values[k], 20) + " nearly coincide");

  bool contact_is_first = contact[0] == 1;
  for (std::size_t i = 1; i < n && contact_is_first; ++i) contact_is_first = contact[i] == 0;
  if (out.dropped.empty() && contact_is_first) {
    out.matrix = block;
    out.contact = contact;
    out.basis = Matrix<real>::identity(n);
    return out;
  }

  const std::size_t k = kept_values.size();
  auto lz = lanczos_from_spectrum(kept_values, kept_overlaps, precision_fraction(0.5) * scale, [](std::size_t step) {
    throw DegenerateSupport("Lanczos breakdown at step " + std::to_string(step));
  });
  out.matrix = Matrix<real>(k, k);
  for (std::size_t i = 0; i < k; ++i) out.matrix(i, i) = lz.alpha[i];
  for (std::size_t i = 0; i + 1 < k; ++i) out.matrix(i, i + 1) = out.matrix(i + 1, i) = lz.beta[i];
  out.contact.assign(k, real(0));
  out.contact[0] = real(1);
  out.basis = Matrix<real>(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t m = 0; m < k; ++m) {
      const real c = lz.basis(m, j);
      if (c == 0) continue;
      for (std::size_t i = 0; i < n; ++i) out.basis(i, j) += c * kept_vectors[m][i];
    }
  return out;
}

inline real default_support_tolerance() { return real("1e-30"); }

// ---------------------------------------------------------------------------
// Symmetrised system

enum class SymmetryMode { Auto, Mirror };

struct SymmetrizedSystem {
  SpinNetwork network;      // the system C as a network: input = in, output = S(in)
  Permutation S;
  ExactValue J_prime;       // coupling across the mirror (zero when no mirror was added)
  bool mirrored = false;
  Matrix<real> C;
  Matrix<real> C_plus, C_minus;
  Matrix<real> E_plus, E_minus;  // dim x dim(C±) orthonormal bases; column 0 is |s±>
  std::size_t contact_plus = 0, contact_minus = 0;
  std::vector<std::size_t> left, right, fixed;  // vertex partition used for state creation

  std::size_t dim() const { return network.n; }
  std::size_t input() const { return network.input; }
  std::size_t mirror_input() const { return network.output; }
};

/// Symmetry-adapted basis of an S-invariant matrix: pairs (|a> +- |S a>)/sqrt2
/// for each orbit representative a, S-fixed vertices joining the + block.
struct SymmetryBlocks {
  std::vector<std::size_t> reps;   // one vertex per exchanged pair
  std::vector<std::size_t> fixed;  // S-fixed vertices, after the pairs in the + block
  Permutation S;
  Matrix<real> plus, minus;

  /// Embeds a block vector back into the full space.
  std::vector<real> lift(const std::vector<real>& u, int sign) const {
    const real r = 1 / sqrt(real(2));
    std::vector<real> v(S.size(), real(0));
    for (std::size_t i = 0; i < reps.size(); ++i) {
      v[reps[i]] = r * u[i];
      v[S[reps[i]]] = sign > 0 ? real(r * u[i]) : real(-r * u[i]);
    }
    if (sign > 0)
      for (std::size_t i = 0; i < fixed.size(); ++i) v[fixed[i]] = u[reps.size() + i];
    return v;
  }

  Matrix<real> basis(int sign) const {
    const std::size_t k = reps.size() + (sign > 0 ? fixed.size() : 0);
    Matrix<real> e(S.size(), k);
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<real> u(k, real(0));
      u[j] = real(1);
      e.set_column(j, lift(u, sign));
    }
    return e;
  }
};

/// Block entries are taken straight from M so exact couplings stay exact where possible.
inline SymmetryBlocks symmetry_blocks(const Matrix<real>& m, const Permutation& s,
                                      std::optional<std::size_t> first = std::nullopt) {
  SymmetryBlocks b;
  b.S = s;
  const std::size_t d = s.size();
  if (first) b.reps.push_back(std::min(*first, s[*first]));
  for (std::size_t v = 0; v < d; ++v) {
    if (first && (v == *first || v == s[*first])) continue;
    if (s[v] > v) b.reps.push_back(v);
    if (s[v] == v) b.fixed.push_back(v);
  }
  if (first) b.reps.front() = *first;
  const real root2 = sqrt(real(2));
  auto block = [&](int sign) {
    const std::size_t np = b.reps.size(), k = np + (sign > 0 ? b.fixed.size() : 0);
    Matrix<real> out(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        if (i < np && j < np) {
          out(i, j) = m(b.reps[i], b.reps[j]);
          if (sign > 0) out(i, j) += m(b.reps[i], s[b.reps[j]]);
          else out(i, j) -= m(b.reps[i], s[b.reps[j]]);
        } else if (i >= np && j >= np) {
          out(i, j) = m(b.fixed[i - np], b.fixed[j - np]);
        } else {
          const std::size_t f = i >= np ? b.fixed[i - np] : b.fixed[j - np];
          const std::size_t a = i >= np ? b.reps[j] : b.reps[i];
          out(i, j) = root2 * m(f, a);
        }
      }
    return out;
  };
  b.plus = block(1);
  b.minus = block(-1);
  return b;
}

namespace detail {

inline void fill_blocks(SymmetrizedSystem& sys) {
  const std::size_t d = sys.dim();
  const auto& S = sys.S;
  const std::size_t in = sys.input();
  const auto blocks = symmetry_blocks(sys.C, S, in);
  sys.C_plus = blocks.plus;
  sys.C_minus = blocks.minus;
  sys.E_plus = blocks.basis(1);
  sys.E_minus = blocks.basis(-1);

  const auto d_in = sys.network.distances_from(in);
  const auto d_out = sys.network.distances_from(S[in]);
  for (std::size_t v = 0; v < d; ++v) {
    if (S[v] == v) sys.fixed.push_back(v);
    else if (d_in[v] < d_out[v] || (d_in[v] == d_out[v] && v < S[v])) sys.left.push_back(v);
    else sys.right.push_back(v);
  }
}

inline SymmetrizedSystem with_involution(const SpinNetwork& net, const Permutation& s) {
  SymmetrizedSystem sys;
  sys.network = net;
  sys.S = s;
  sys.J_prime = ExactValue(0);
  sys.C = build_hamiltonian(net);
  fill_blocks(sys);
  return sys;
}

inline SymmetrizedSystem mirror(const SpinNetwork& net, const ExactValue& j_prime) {
  if (!(j_prime.coefficient() > 0)) throw InvalidNetwork("J' must be positive");
  const std::size_t n = net.n;
  SpinNetwork c = SpinNetwork::empty(2 * n);
  auto image = [&](std::size_t v) { return 2 * n - 1 - v; };
  for (std::size_t v = 0; v < n; ++v) {
    c.fields[v] = net.fields[v];
    c.fields[image(v)] = net.fields[v];
  }
  for (const auto& [key, w] : net.couplings) {
    c.set_coupling(key.first, key.second, w);
    c.set_coupling(image(key.first), image(key.second), w);
  }
  c.set_coupling(net.output, image(net.output), j_prime);
  c.input = net.input;
  c.output = image(net.input);
  SymmetrizedSystem sys;
  sys.network = c;
  sys.S.resize(2 * n);
  for (std::size_t v = 0; v < 2 * n; ++v) sys.S[v] = image(v);
  sys.J_prime = j_prime;
  sys.mirrored = true;
  sys.C = build_hamiltonian(c);
  fill_blocks(sys);
  sys.left.clear();
  sys.right.clear();
  sys.fixed.clear();
  for (std::size_t v = 0; v < n; ++v) {
    sys.left.push_back(v);
    sys.right.push_back(image(v));
  }
  std::sort(sys.right.begin(), sys.right.end());
  return sys;
}

inline bool same_resolvent(const Resolvent& a, const Resolvent& b, const real& tol) {
  using std::abs;
  // Weights of (nearly) repeated eigenvalues are pooled: the split inside a
  // degenerate eigenspace is arbitrary.
  const real merge("1e-25");
  auto pooled = [&](const Resolvent& r) {
    std::vector<std::pair<real, real>> out;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      if (!out.empty() && abs(r.values[k] - out.back().first) <= merge) out.back().second += r.weights[k];
      else out.emplace_back(r.values[k], r.weights[k]);
    }
    std::erase_if(out, [&](const auto& p) { return p.second <= tol; });
    return out;
  };
  const auto pa = pooled(a), pb = pooled(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t k = 0; k < pa.size(); ++k)
    if (abs(pa[k].first - pb[k].first) > merge || abs(pa[k].second - pb[k].second) > merge) return false;
  return true;
}

}  // namespace detail

/// Builds C and its symmetry blocks. In Auto mode an existing mirror symmetry
/// exchanging input and output is used when one is found; otherwise the
/// network is doubled with its mirror image joined by J' at the output.
inline SymmetrizedSystem symmetrize(const SpinNetwork& net, const ExactValue& j_prime, SymmetryMode mode = SymmetryMode::Auto,
                                    const std::optional<Permutation>& requested = std::nullopt) {
  net.validate();
  if (requested) {
    if (!is_mirror_involution(net, *requested))
      throw InvalidNetwork("the requested symmetry is not an involutive automorphism exchanging input and output");
    return detail::with_involution(net, *requested);
  }
  if (mode == SymmetryMode::Mirror || net.n == 1) return detail::mirror(net, j_prime);
  const auto candidates = find_mirror_involutions(net);
  if (candidates.empty()) return detail::mirror(net, j_prime);
  if (candidates.size() == 1) return detail::with_involution(net, candidates.front());

  // Several symmetries: acceptable only if they induce the same reduced blocks.
  std::vector<SymmetrizedSystem> systems;
  for (const auto& s : candidates) systems.push_back(detail::with_involution(net, s));
  const real tol = default_support_tolerance();
  const auto ref_p = Resolvent::of(systems.front().C_plus);
  const auto ref_m = Resolvent::of(systems.front().C_minus);
  for (std::size_t k = 1; k < systems.size(); ++k) {
    if (!detail::same_resolvent(ref_p, Resolvent::of(systems[k].C_plus), tol) ||
        !detail::same_resolvent(ref_m, Resolvent::of(systems[k].C_minus), tol))
      throw SymmetryDetectionAmbiguous(std::to_string(candidates.size()) +
                                       " mirror symmetries with different subspace blocks; specify one");
  }
  std::size_t best = 0;
  auto fixed_count = [](const Permutation& s) {
    std::size_t f = 0;
    for (std::size_t v = 0; v < s.size(); ++v) f += s[v] == v;
    return f;
  };
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (fixed_count(candidates[k]) < fixed_count(candidates[best])) best = k;
  return systems[best];
}

/// Contact vector e_0 of the given dimension.
inline std::vector<real> unit_contact(std::size_t n) {
  std::vector<real> c(n, real(0));
  if (n > 0) c[0] = real(1);
  return c;
}

// ---------------------------------------------------------------------------
// Bipartite / field-free / even classification

struct Classification {
  bool bipartite = false;
  bool field_free = false;
  bool even = false;
  std::optional<std::vector<int>> sign_operator;  // diagonal D with D C D = -C
};

inline Classification classify_field_free_even(const SymmetrizedSystem& sys) {
  Classification cl;
  const auto& net = sys.network;
  cl.field_free = std::all_of(net.fields.begin(), net.fields.end(), [](const ExactValue& f) { return f.is_zero(); });
  std::vector<int> colour(net.n, 0);
  const auto adj = net.adjacency();
  bool ok = true;
  for (std::size_t root = 0; root < net.n && ok; ++root) {
    if (colour[root] != 0) continue;
    colour[root] = 1;
    std::deque<std::size_t> todo{root};
    while (!todo.empty() && ok) {
      const auto v = todo.front();
      todo.pop_front();
      for (auto u : adj[v]) {
        if (colour[u] == 0) {
          colour[u] = -colour[v];
          todo.push_back(u);
        } else if (colour[u] == colour[v]) {
          ok = false;
        }
      }
    }
  }
  cl.bipartite = ok;
  if (ok) {
    cl.sign_operator = colour;
    cl.even = true;
    for (std::size_t v = 0; v < net.n; ++v)
      if (colour[sys.S[v]] == colour[v]) cl.even = false;
  }
  return cl;
}

}  // namespace pstx

#endif  // PSTX_NETWORK_HPP
