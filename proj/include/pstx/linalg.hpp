#ifndef PSTX_LINALG_HPP
#define PSTX_LINALG_HPP

#include "pstx/errors.hpp"
#include "pstx/matrix.hpp"
#include "pstx/numeric.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace pstx {

template <class T>
T unit_roundoff() {
  return std::numeric_limits<T>::epsilon();
}
template <>
inline real unit_roundoff<real>() {
  return epsilon();
}

template <class T>
struct SymmetricEigen {
  std::vector<T> values;  // ascending
  Matrix<T> vectors;      // column k is the eigenvector of values[k]
};

namespace detail {

template <class T>
T hypot2(const T& a, const T& b) {
  using std::sqrt;
  return sqrt(a * a + b * b);
}

// Householder reduction to tridiagonal form with accumulated transforms
// (EISPACK tred2 as arranged in JAMA).
template <class T>
void tred2(Matrix<T>& V, std::vector<T>& d, std::vector<T>& e) {
  using std::abs;
  using std::sqrt;
  const int n = static_cast<int>(V.rows());
  for (int j = 0; j < n; ++j) d[j] = V(n - 1, j);
  for (int i = n - 1; i > 0; --i) {
    T scale(0), h(0);
    for (int k = 0; k < i; ++k) scale += abs(d[k]);
    if (scale == 0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = T(0);
        V(j, i) = T(0);
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      T f = d[i - 1];
      T g = sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = T(0);
      for (int j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = T(0);
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const T hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = T(0);
      }
    }
    d[i] = h;
  }
  for (int i = 0; i < n - 1; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = T(1);
    const T h = d[i + 1];
    if (h != 0) {
      for (int k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (int j = 0; j <= i; ++j) {
        T g(0);
        for (int k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (int k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (int k = 0; k <= i; ++k) V(k, i + 1) = T(0);
  }
  for (int j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = T(0);
  }
  V(n - 1, n - 1) = T(1);
  e[0] = T(0);
}

// Implicit QL on the tridiagonal form (EISPACK tql2 as arranged in JAMA).
template <class T>
void tql2(Matrix<T>& V, std::vector<T>& d, std::vector<T>& e, const T& eps) {
  using std::abs;
  const int n = static_cast<int>(V.rows());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = T(0);
  T f(0), tst1(0);
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, T(abs(d[l]) + abs(e[l])));
    int m = l;
    while (m < n) {
      if (abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 200) throw Error("tql2: no convergence");
        T g = d[l];
        T p = (d[l + 1] - g) / (T(2) * e[l]);
        T r = hypot2(p, T(1));
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const T dl1 = d[l + 1];
        T h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;
        p = d[m];
        T c(1), c2(1), c3(1);
        const T el1 = e[l + 1];
        T s(0), s2(0);
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = hypot2(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (int k = 0; k < n; ++k) {
            h = V(k, i + 1);
            V(k, i + 1) = s * V(k, i) + c * h;
            V(k, i) = c * V(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = T(0);
  }
}

}  // namespace detail

/// Full eigendecomposition of a real symmetric matrix, eigenvalues ascending.
template <class T>
SymmetricEigen<T> symmetric_eigen(const Matrix<T>& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");
  SymmetricEigen<T> out;
  if (n == 0) return out;
  if (n == 1) {
    out.values = {a(0, 0)};
    out.vectors = Matrix<T>::identity(1);
    return out;
  }
  Matrix<T> V = a;
  std::vector<T> d(n), e(n);
  detail::tred2(V, d, e);
  detail::tql2(V, d, e, unit_roundoff<T>());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  out.values.resize(n);
  out.vectors = Matrix<T>(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    // Fix the sign so the largest-magnitude component is positive; keeps
    // results reproducible across equivalent inputs.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      using std::abs;
      if (abs(V(i, order[k])) > abs(V(arg, order[k])) * T(1.0000001)) arg = i;
    }
    const bool flip = V(arg, order[k]) < 0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = flip ? T(-V(i, order[k])) : V(i, order[k]);
  }
  return out;
}

/// Determinant by LU with partial pivoting.
template <class T>
T determinant(Matrix<T> a) {
  using std::abs;
  const std::size_t n = a.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a(r, c)) > abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0) return T(0);
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const T factor = a(r, c) / a(c, c);
      if (factor == 0) continue;
      for (std::size_t j = c; j < n; ++j) a(r, j) -= factor * a(c, j);
    }
  }
  return det;
}

/// Solves A x = b by Gaussian elimination with complete pivoting.
/// Throws SingularSystem when a pivot falls below `relative_tol` times the largest entry.
template <class T>
std::vector<T> solve_full_pivot(Matrix<T> a, std::vector<T> b, const T& relative_tol) {
  using std::abs;
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_full_pivot: shape mismatch");
  std::vector<std::size_t> col_perm(n);
  std::iota(col_perm.begin(), col_perm.end(), 0);
  T scale(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, T(abs(a(i, j))));
  if (scale == 0) throw SingularSystem("zero matrix");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    T best(0);
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (abs(a(i, j)) > best) {
          best = abs(a(i, j));
          pr = i;
          pc = j;
        }
    if (best <= relative_tol * scale) throw SingularSystem("pivot below tolerance at step " + std::to_string(k));
    if (pr != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pr, j));
      std::swap(b[k], b[pr]);
    }
    if (pc != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pc));
      std::swap(col_perm[k], col_perm[pc]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T factor = a(i, k) / a(k, k);
      if (factor == 0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
      b[i] -= factor * b[k];
    }
  }
  std::vector<T> y(n);
  for (std::size_t ii = n; ii-- > 0;) {
    T s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * y[j];
    y[ii] = s / a(ii, ii);
  }
  std::vector<T> x(n);
  for (std::size_t k = 0; k < n; ++k) x[col_perm[k]] = y[k];
  return x;
}

/// Orthonormal basis of { x : rows · x = 0 }, from the near-zero eigenspace of rowsᵀ·rows.
template <class T>
std::vector<std::vector<T>> null_space(const Matrix<T>& rows, std::size_t cols, const T& relative_tol) {
  if (rows.rows() == 0) {
    std::vector<std::vector<T>> basis;
    for (std::size_t j = 0; j < cols; ++j) {
      std::vector<T> e(cols, T(0));
      e[j] = T(1);
      basis.push_back(std::move(e));
    }
    return basis;
  }
  const Matrix<T> gram = rows.transpose() * rows;
  const auto eig = symmetric_eigen(gram);
  const T top = std::max(T(1), eig.values.back());
  std::vector<std::vector<T>> basis;
  for (std::size_t k = 0; k < cols; ++k)
    if (eig.values[k] <= relative_tol * top) basis.push_back(eig.vectors.column(k));
  return basis;
}

/// Modified Gram-Schmidt (two passes). Vectors that collapse below `tol` are dropped.
template <class T>
std::vector<std::vector<T>> orthonormalize(const std::vector<std::vector<T>>& in, const T& tol) {
  std::vector<std::vector<T>> out;
  for (auto v : in) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out) {
        const T c = dot(q, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
      }
    const T nv = norm(v);
    if (nv <= tol) continue;
    for (auto& x : v) x /= nv;
    out.push_back(std::move(v));
  }
  return out;
}

template <class T>
struct LanczosResult {
  std::vector<T> alpha;  // diagonal, starting at the seed vector
  std::vector<T> beta;   // off-diagonal, all positive
  Matrix<T> basis;       // column j is the j-th Lanczos vector (in node coordinates)
};

/// Lanczos on diag(nodes) seeded with `start`, with full reorthogonalisation.
/// Returns the Jacobi matrix whose spectral measure at the seed is (nodes, start^2).
/// Calls `on_breakdown(step)` (which must throw) when an off-diagonal falls below `tol`.
template <class T, class OnBreakdown>
LanczosResult<T> lanczos_from_spectrum(const std::vector<T>& nodes, std::vector<T> start, const T& tol,
                                       OnBreakdown on_breakdown) {
  const std::size_t n = nodes.size();
  LanczosResult<T> out;
  out.basis = Matrix<T>(n, n);
  const T s = norm(start);
  for (auto& v : start) v /= s;
  std::vector<std::vector<T>> q{start};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<T> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = nodes[i] * q[k][i];
    const T a = dot(q[k], w);
    out.alpha.push_back(a);
    if (k + 1 == n) break;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qq : q) {
        const T c = dot(qq, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * qq[i];
      }
    const T b = norm(w);
    if (b <= tol) on_breakdown(k + 1);
    out.beta.push_back(b);
    for (auto& v : w) v /= b;
    q.push_back(std::move(w));
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) out.basis(i, j) = q[j][i];
  return out;
}

}  // namespace pstx

#endif  // PSTX_LINALG_HPP
