#ifndef PSTX_CHAIN_HPP
#define PSTX_CHAIN_HPP

#include "pstx/matrix.hpp"
#include "pstx/numeric.hpp"
#include "pstx/polynomial.hpp"

#include <stdexcept>
#include <vector>

namespace pstx {

/// Engineered extension chain. Sites are stored from the free (outer) end
/// towards the contact, so the contact site is always the last one.
struct TridiagonalChain {
  std::vector<real> couplings;  // size() - 1 entries, couplings[i] joins sites i and i+1
  std::vector<real> fields;

  std::size_t size() const { return fields.size(); }
  std::size_t contact() const { return fields.size() - 1; }

  void check() const {
    if (fields.empty()) throw std::invalid_argument("chain has no sites");
    if (couplings.size() + 1 != fields.size()) throw std::invalid_argument("chain coupling count mismatch");
  }

  Matrix<real> to_matrix() const {
    check();
    const std::size_t n = size();
    Matrix<real> m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = fields[i];
    for (std::size_t i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = couplings[i];
    return m;
  }

  /// Characteristic polynomials of the leading k-site blocks, k = 0..size().
  /// Entry size() is Q_A; entry size()-1 is P_A (contact removed).
  std::vector<Polynomial<real>> leading_char_polys() const {
    check();
    std::vector<Polynomial<real>> p;
    p.reserve(size() + 1);
    p.push_back(Polynomial<real>::constant(real(1)));
    p.push_back(Polynomial<real>({real(-fields[0]), real(1)}));
    for (std::size_t k = 2; k <= size(); ++k) {
      const Polynomial<real> lin({real(-fields[k - 1]), real(1)});
      const real b2 = couplings[k - 2] * couplings[k - 2];
      p.push_back(lin * p[k - 1] - b2 * p[k - 2]);
    }
    return p;
  }

  Polynomial<real> char_poly() const { return leading_char_polys().back(); }
  Polynomial<real> contact_removed_char_poly() const { return leading_char_polys()[size() - 1]; }

  /// The same chain with the contact at the front (inner to outer order).
  TridiagonalChain reversed() const {
    TridiagonalChain r{{couplings.rbegin(), couplings.rend()}, {fields.rbegin(), fields.rend()}};
    return r;
  }
};

}  // namespace pstx

#endif  // PSTX_CHAIN_HPP
