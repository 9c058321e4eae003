#pragma once

// Small dense floating-point linear algebra (n <= 6 or so): everything the
// measures and the flow need, with no external solver.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace jetlab::linalg {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // list of rows

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius(const Mat& M) {
  double s = 0.0;
  for (const auto& row : M) s += dot(row, row);
  return std::sqrt(s);
}

inline Mat transpose(const Mat& M) {
  if (M.empty()) return {};
  Mat T(M.front().size(), Vec(M.size()));
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M[i].size(); ++j) T[j][i] = M[i][j];
  return T;
}

/// Determinant by LU with partial pivoting.
inline double det(Mat A) {
  const std::size_t n = A.size();
  double d = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (A[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(A[piv], A[k]);
      d = -d;
    }
    d *= A[k][k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return d;
}

/// Solves A x = b (A square). Throws on an exactly singular pivot.
inline Vec solve(Mat A, Vec b) {
  const std::size_t n = A.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (A[piv][k] == 0.0) throw std::domain_error("singular linear system");
    std::swap(A[piv], A[k]);
    std::swap(b[piv], b[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  Vec x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= A[k][j] * x[j];
    x[k] = s / A[k][k];
  }
  return x;
}

/**
 * Singular values of M (any shape), descending, by one-sided Jacobi on the
 * columns of the taller orientation. Accurate to high relative precision,
 * including the small singular values.
 */
inline Vec singular_values(const Mat& M, double tol = 1e-15, int max_sweeps = 60) {
  if (M.empty() || M.front().empty()) return {};
  // Work on columns of A with rows >= cols.
  Mat A = M.size() >= M.front().size() ? M : transpose(M);
  const std::size_t m = A.size();
  const std::size_t n = A.front().size();
  // Store columns contiguously.
  Mat cols(n, Vec(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = A[i][j];

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(cols[p], cols[p]);
        const double beta = dot(cols[q], cols[q]);
        const double gamma = dot(cols[p], cols[q]);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cols[p][i];
          const double y = cols[q][i];
          cols[p][i] = c * x - s * y;
          cols[q][i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  Vec sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm(cols[j]);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

/// Spectral norm (largest singular value).
inline double operator_norm(const Mat& M) {
  auto sv = singular_values(M);
  return sv.empty() ? 0.0 : sv.front();
}

/**
 * Orthonormal basis of span(vectors), built greedily in order of descending
 * norm; a vector is dropped when its residual is below rel_tol times its
 * norm (numerically inside the span already). Uses two Gram-Schmidt passes.
 */
inline Mat orthonormal_basis(const Mat& vectors, double rel_tol = 1e-12) {
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norm(vectors[a]) > norm(vectors[b]); });
  Mat basis;
  for (auto k : order) {
    Vec r = vectors[k];
    const double n0 = norm(r);
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        const double c = dot(q, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * q[i];
      }
    const double nr = norm(r);
    if (nr <= rel_tol * n0) continue;
    for (auto& v : r) v /= nr;
    basis.push_back(std::move(r));
  }
  return basis;
}

/// Component of v orthogonal to span(vectors).
inline Vec residual_from_span(const Vec& v, const Mat& vectors, double rel_tol = 1e-12) {
  const Mat basis = orthonormal_basis(vectors, rel_tol);
  Vec r = v;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) {
      const double c = dot(q, r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * q[i];
    }
  return r;
}

inline double distance_to_span(const Vec& v, const Mat& vectors, double rel_tol = 1e-12) {
  return norm(residual_from_span(v, vectors, rel_tol));
}

}  // namespace jetlab::linalg
