#pragma once

/**
 * @file measures.hpp
 * @brief Degeneracy measures of a p x n matrix (rows v_1..v_p) and the Kuo
 * and Thom quantities of a map.
 *
 * kappa: Kuo distance, min_i dist(v_i, span of the other rows).
 * nu: Rabier function, the smallest singular value.
 * eta, eta_tilde: minor-ratio surrogates, with 0/0 = 0.
 */

#include <jetlab/linalg.hpp>
#include <jetlab/minors.hpp>
#include <jetlab/polynomial.hpp>
#include <jetlab/random.hpp>
#include <jetlab/sigma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace jetlab {

/// Exact determinant by Gaussian elimination over the rationals.
inline Rational det_exact(Matrix<Rational> A) {
  const std::size_t n = A.size();
  Rational d = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && A[piv][k] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != k) {
      std::swap(A[piv], A[k]);
      d = -d;
    }
    d *= A[k][k];
    for (std::size_t i = k + 1; i < n; ++i) {
      if (A[i][k] == 0) continue;
      const Rational f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return d;
}

/// Determinant of the pairwise inner-product matrix.
inline Rational gram_det(const std::vector<std::vector<Rational>>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("gram_det needs at least one vector");
  const std::size_t k = vectors.size();
  for (const auto& v : vectors)
    if (v.size() != vectors.front().size()) throw std::invalid_argument("gram_det: vectors differ in length");
  Matrix<Rational> G(k, std::vector<Rational>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      Rational s = 0;
      for (std::size_t l = 0; l < vectors[i].size(); ++l) s += vectors[i][l] * vectors[j][l];
      G[i][j] = G[j][i] = s;
    }
  return det_exact(std::move(G));
}

inline double gram_det(const linalg::Mat& vectors) {
  if (vectors.empty()) throw std::invalid_argument("gram_det needs at least one vector");
  const std::size_t k = vectors.size();
  linalg::Mat G(k, linalg::Vec(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) G[i][j] = G[j][i] = linalg::dot(vectors[i], vectors[j]);
  return linalg::det(std::move(G));
}

namespace detail {

inline void check_shape(std::size_t p, std::size_t n) {
  if (p == 0) throw std::invalid_argument("measure of an empty matrix");
  if (n < p) throw std::invalid_argument("measures need n >= p");
}

inline Rational squared_norm(const std::vector<Rational>& v) {
  Rational s = 0;
  for (const auto& x : v) s += x * x;
  return s;
}

}  // namespace detail

/**
 * Exact squared Kuo distance. For each i the others are reduced to a
 * maximal independent subset B (greedy by descending squared norm, rank
 * decided by a positive Gram determinant); then dist^2 = G(B + v_i) / G(B).
 */
inline Rational kuo_kappa_squared_exact(const Matrix<Rational>& M) {
  const std::size_t p = M.size();
  detail::check_shape(p, p == 0 ? 0 : M.front().size());
  Rational best = -1;
  for (std::size_t i = 0; i < p; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      return detail::squared_norm(M[a]) > detail::squared_norm(M[b]);
    });
    std::vector<std::vector<Rational>> basis;
    Rational g_basis = 1;
    for (auto j : others) {
      basis.push_back(M[j]);
      Rational g = gram_det(basis);
      if (g > 0) g_basis = g;
      else basis.pop_back();
    }
    Rational d2;
    if (basis.empty()) {
      d2 = detail::squared_norm(M[i]);
    } else {
      basis.push_back(M[i]);
      d2 = gram_det(basis) / g_basis;
    }
    if (best < 0 || d2 < best) best = d2;
  }
  return best;
}

inline double kuo_kappa(const linalg::Mat& M) {
  const std::size_t p = M.size();
  detail::check_shape(p, p == 0 ? 0 : M.front().size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    linalg::Mat others;
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) others.push_back(M[j]);
    best = std::min(best, linalg::distance_to_span(M[i], others));
  }
  return best;
}

/// Smallest singular value of the p x n matrix.
inline double rabier_nu(const linalg::Mat& M) {
  const std::size_t p = M.size();
  detail::check_shape(p, p == 0 ? 0 : M.front().size());
  return linalg::singular_values(M).back();
}

namespace detail {

inline double minor_value(const linalg::Mat& M, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols) {
  linalg::Mat sub(rows.size(), linalg::Vec(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) sub[a][b] = M[rows[a]][cols[b]];
  return rows.empty() ? 1.0 : linalg::det(std::move(sub));
}

}  // namespace detail

/// eta = sqrt(sum_I M_I^2 / sum_{J,j} M_J(j)^2), 0/0 = 0.
inline double eta(const linalg::Mat& M) {
  const std::size_t p = M.size();
  const std::size_t n = p == 0 ? 0 : M.front().size();
  detail::check_shape(p, n);
  std::vector<std::size_t> all_rows(p);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  double num = 0.0;
  for (const auto& I : combinations(n, p)) {
    const double m = detail::minor_value(M, all_rows, I);
    num += m * m;
  }
  double den = 0.0;
  for (const auto& rows : combinations(p, p - 1))
    for (const auto& J : combinations(n, p - 1)) {
      const double m = detail::minor_value(M, rows, J);
      den += m * m;
    }
  if (num == 0.0) return 0.0;
  return std::sqrt(num / den);
}

/**
 * eta_tilde = max_I |M_I| / h_I with h_I the largest (p-1)-minor whose
 * columns are a subsequence of I (any deleted row); 0/0 = 0.
 */
inline double eta_tilde(const linalg::Mat& M) {
  const std::size_t p = M.size();
  const std::size_t n = p == 0 ? 0 : M.front().size();
  detail::check_shape(p, n);
  std::vector<std::size_t> all_rows(p);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  double best = 0.0;
  for (const auto& I : combinations(n, p)) {
    const double top = std::abs(detail::minor_value(M, all_rows, I));
    if (top == 0.0) continue;
    double h = 0.0;
    for (const auto& sub : combinations(p, p - 1)) {
      std::vector<std::size_t> J;
      for (auto k : sub) J.push_back(I[k]);
      for (const auto& rows : combinations(p, p - 1)) h = std::max(h, std::abs(detail::minor_value(M, rows, J)));
    }
    best = std::max(best, top / h);
  }
  return best;
}

struct MeasureReport {
  double kappa = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  double eta_tilde = 0.0;
  std::size_t p = 0;
  std::size_t n = 0;
};

inline MeasureReport measure_matrix(const linalg::Mat& M) {
  MeasureReport r;
  r.p = M.size();
  r.n = M.empty() ? 0 : M.front().size();
  r.kappa = kuo_kappa(M);
  r.nu = rabier_nu(M);
  r.eta = eta(M);
  r.eta_tilde = eta_tilde(M);
  return r;
}

// ---------------------------------------------------------------------------
// Kuo and Thom quantities
//
// K_m(f, x) = ||x||^m sum_I |det D(f)/D(x_I)|^m + ||f(x)||^m
// T_m(f, x) = sum_{|I| = p+1} |det D(f, rho)/D(x_I)|^m + ||f(x)||^m, rho = ||x||^2

namespace detail {

inline double sum_abs_pow_minors(const linalg::Mat& J, std::size_t k, unsigned m) {
  const std::size_t rows = J.size();
  const std::size_t n = J.front().size();
  std::vector<std::size_t> all_rows(rows);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  double s = 0.0;
  for (const auto& I : combinations(n, k)) s += std::pow(std::abs(minor_value(J, all_rows, I)), m);
  return s;
}

inline void check_quantity_args(std::size_t p, std::size_t n, unsigned m) {
  check_shape(p, n);
  if (m < 1) throw std::invalid_argument("m must be >= 1");
}

}  // namespace detail

inline double kuo_quantity(const CompiledMap& F, std::span<const double> x, unsigned m) {
  detail::check_quantity_args(F.size(), F.nvars(), m);
  const auto J = F.jacobian(x);
  const double fx = linalg::norm(F.value(x));
  return std::pow(linalg::norm(x), m) * detail::sum_abs_pow_minors(J, F.size(), m) + std::pow(fx, m);
}

inline double thom_quantity(const CompiledMap& F, std::span<const double> x, unsigned m) {
  detail::check_quantity_args(F.size(), F.nvars(), m);
  const double fx = linalg::norm(F.value(x));
  double minors_term = 0.0;
  if (F.nvars() > F.size()) {
    auto J = F.jacobian(x);
    linalg::Vec grad_rho(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) grad_rho[i] = 2.0 * x[i];
    J.push_back(std::move(grad_rho));
    minors_term = detail::sum_abs_pow_minors(J, F.size() + 1, m);
  }
  return minors_term + std::pow(fx, m);
}

inline double kuo_quantity(const PolyMap& F, std::span<const double> x, unsigned m) {
  return kuo_quantity(CompiledMap(F), x, m);
}

inline double thom_quantity(const PolyMap& F, std::span<const double> x, unsigned m) {
  return thom_quantity(CompiledMap(F), x, m);
}

namespace detail {

inline void check_even(unsigned m) {
  if (m == 0 || m % 2 != 0) throw std::invalid_argument("exact Kuo/Thom quantities need even m >= 2");
}

/// Jacobian of F (optionally with grad rho appended) as polynomials.
inline Matrix<Polynomial> quantity_jacobian(const PolyMap& F, bool with_rho) {
  auto J = jacobian(F);
  if (with_rho) {
    std::vector<Polynomial> row;
    for (std::size_t i = 0; i < F.nvars(); ++i) row.push_back(Polynomial::variable(F.nvars(), i) * Rational(2));
    J.push_back(std::move(row));
  }
  return J;
}

inline Polynomial sum_of_squares(const std::vector<Polynomial>& ps, std::size_t nvars) {
  Polynomial s(nvars);
  for (const auto& p : ps) s += p * p;
  return s;
}

}  // namespace detail

/// K_m as a polynomial (even m only).
inline Polynomial kuo_quantity_polynomial(const PolyMap& F, unsigned m) {
  detail::check_even(m);
  detail::check_quantity_args(F.size(), F.nvars(), m);
  const std::size_t n = F.nvars();
  Polynomial rho(n);
  for (std::size_t i = 0; i < n; ++i) rho += Polynomial::variable(n, i).pow(2);
  Polynomial minors_sum(n);
  for (const auto& [idx, d] : minors(jacobian(F), F.size())) minors_sum += d.pow(m);
  return rho.pow(m / 2) * minors_sum + detail::sum_of_squares(F.components(), n).pow(m / 2);
}

/// T_m as a polynomial (even m only).
inline Polynomial thom_quantity_polynomial(const PolyMap& F, unsigned m) {
  detail::check_even(m);
  detail::check_quantity_args(F.size(), F.nvars(), m);
  const std::size_t n = F.nvars();
  Polynomial minors_sum(n);
  if (n > F.size()) {
    const auto J = detail::quantity_jacobian(F, true);
    std::vector<std::size_t> all_rows(J.size());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const Polynomial zero(n);
    const Polynomial one = Polynomial::constant(n, 1);
    for (const auto& I : combinations(n, F.size() + 1))
      minors_sum += determinant(J, std::span<const std::size_t>(all_rows), std::span<const std::size_t>(I), zero, one)
                        .pow(m);
  }
  return minors_sum + detail::sum_of_squares(F.components(), n).pow(m / 2);
}

inline Rational kuo_quantity_exact(const PolyMap& F, std::span<const Rational> x, unsigned m) {
  return kuo_quantity_polynomial(F, m).eval(x);
}

inline Rational thom_quantity_exact(const PolyMap& F, std::span<const Rational> x, unsigned m) {
  return thom_quantity_polynomial(F, m).eval(x);
}

// ---------------------------------------------------------------------------
// K_m / T_m ratio scan

struct RatioShellRow {
  double eps = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::vector<double> argmin;
  std::vector<double> argmax;
  std::size_t used = 0;     // samples with T_m > 0
  std::size_t skipped = 0;  // samples with T_m = 0
};

struct RatioScan {
  bool conclusive = false;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::vector<RatioShellRow> shells;
  std::uint64_t seed = 0;
};

/// Empirical bounds of K_m / T_m over shell samples where T_m > 0.
inline RatioScan km_tm_ratio_scan(const PolyMap& F, unsigned m, const SigmaSet& sigma, const std::vector<double>& shells,
                                  std::size_t samples_per_shell, std::uint64_t seed, double box_radius = 0.5) {
  const CompiledMap cf(F);
  RatioScan scan;
  scan.seed = seed;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    const double eps = shells[k];
    RatioShellRow row;
    row.eps = eps;
    row.min_ratio = std::numeric_limits<double>::infinity();
    const auto pts = sample_shell(sigma, eps, samples_per_shell, std::max(box_radius, 2.0 * eps),
                                  derive_seed(seed, k));
    for (const auto& x : pts) {
      const double t = thom_quantity(cf, x, m);
      if (!(t > 0.0)) {
        ++row.skipped;
        continue;
      }
      const double ratio = kuo_quantity(cf, x, m) / t;
      ++row.used;
      if (ratio < row.min_ratio) {
        row.min_ratio = ratio;
        row.argmin = x;
      }
      if (ratio > row.max_ratio) {
        row.max_ratio = ratio;
        row.argmax = x;
      }
    }
    if (row.used > 0) {
      scan.conclusive = true;
      scan.min_ratio = std::min(scan.min_ratio, row.min_ratio);
      scan.max_ratio = std::max(scan.max_ratio, row.max_ratio);
    } else {
      row.min_ratio = 0.0;
    }
    scan.shells.push_back(std::move(row));
  }
  return scan;
}

}  // namespace jetlab
