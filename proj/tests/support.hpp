#pragma once

#include "pstx/pstx.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing_support {

using pstx::real;

inline std::string data_path(const std::string& name) { return std::string(PSTX_DATA_DIR) + "/networks/" + name; }

inline bool close(const real& a, const real& b, const real& tol) {
  using std::abs;
  return abs(a - b) <= tol;
}

inline bool close(const real& a, double b, double tol) { return close(a, real(b), real(tol)); }

inline real max_abs_diff(const std::vector<real>& a, const std::vector<real>& b) {
  using std::abs;
  if (a.size() != b.size()) return real(1e300);
  real m(0);
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, real(abs(a[i] - b[i])));
  return m;
}

inline pstx::SpinNetwork fig5_network() { return pstx::load_network(data_path("fig5.json")).network; }
inline pstx::SpinNetwork fig6_network() { return pstx::load_network(data_path("fig6.json")).network; }
inline pstx::SpinNetwork dark_network() { return pstx::load_network(data_path("dark_state.json")).network; }

inline pstx::SpinNetwork chain(const std::vector<pstx::ExactValue>& couplings) {
  auto net = pstx::SpinNetwork::empty(couplings.size() + 1);
  for (std::size_t i = 0; i < couplings.size(); ++i) net.set_coupling(i, i + 1, couplings[i]);
  net.input = 0;
  net.output = couplings.size();
  return net;
}

inline pstx::SupportedBlock block(const pstx::Matrix<real>& m) {
  return pstx::reduce_full_support(m, pstx::unit_contact(m.rows()), pstx::default_support_tolerance());
}

inline pstx::Matrix<real> from_rows(const std::vector<std::vector<real>>& rows) {
  pstx::Matrix<real> m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

/// Random symmetric matrix with entries from a double-precision generator (exact in MPFR).
inline pstx::Matrix<real> random_symmetric(std::mt19937_64& gen, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  pstx::Matrix<real> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = real(u(gen));
  return m;
}

inline pstx::TridiagonalChain random_chain(std::mt19937_64& gen, std::size_t n, double cmin = 0.1, double cmax = 2,
                                           double fmin = -1, double fmax = 1) {
  std::uniform_real_distribution<double> c(cmin, cmax), f(fmin, fmax);
  pstx::TridiagonalChain a;
  for (std::size_t i = 0; i < n; ++i) a.fields.push_back(real(f(gen)));
  for (std::size_t i = 0; i + 1 < n; ++i) a.couplings.push_back(real(c(gen)));
  return a;
}

inline pstx::Poly poly(const std::vector<double>& ascending) {
  std::vector<real> c;
  for (double x : ascending) c.push_back(real(x));
  return pstx::Poly(c);
}

}  // namespace testing_support
