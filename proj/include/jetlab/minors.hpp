#pragma once

// Determinants and minors over any commutative ring type (polynomials,
// truncated series, rationals, doubles). Sizes here are tiny (n <= 6), so
// plain cofactor expansion is used.

#include <jetlab/polynomial.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace jetlab {

struct MinorIndex {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  friend auto operator<=>(const MinorIndex&, const MinorIndex&) = default;
  friend bool operator==(const MinorIndex&, const MinorIndex&) = default;
};

/// All increasing k-subsets of {0, ..., n-1}, in lexicographic order.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    if (k == 0) break;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

/// Determinant of the submatrix M[rows][cols] by expansion along the first row.
template <class T>
T determinant(const Matrix<T>& M, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
              const T& zero, const T& one) {
  if (rows.size() != cols.size()) throw std::invalid_argument("determinant of a non-square selection");
  const std::size_t k = rows.size();
  if (k == 0) return one;
  if (k == 1) return M[rows[0]][cols[0]];
  if (k == 2) {
    return M[rows[0]][cols[0]] * M[rows[1]][cols[1]] - M[rows[0]][cols[1]] * M[rows[1]][cols[0]];
  }
  T sum = zero;
  std::vector<std::size_t> sub_cols(k - 1);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0, w = 0; j < k; ++j)
      if (j != c) sub_cols[w++] = cols[j];
    T cof = determinant(M, rows.subspan(1), std::span<const std::size_t>(sub_cols), zero, one);
    T term = M[rows[0]][cols[c]] * cof;
    if (c % 2 == 0) sum = sum + term;
    else sum = sum - term;
  }
  return sum;
}

/**
 * All k x k minors of M. When k equals the row count only column tuples
 * vary; otherwise every (row tuple, column tuple) pair is listed. k = 0
 * gives the single empty minor with value `one`.
 */
template <class T>
std::map<MinorIndex, T> minors(const Matrix<T>& M, std::size_t k, const T& zero, const T& one) {
  const std::size_t rows = M.size();
  const std::size_t cols = rows == 0 ? 0 : M.front().size();
  if (k > rows || k > cols) throw std::invalid_argument("minor size exceeds matrix dimensions");
  std::map<MinorIndex, T> out;
  for (const auto& r : combinations(rows, k))
    for (const auto& c : combinations(cols, k))
      out.emplace(MinorIndex{r, c}, determinant(M, std::span<const std::size_t>(r),
                                                std::span<const std::size_t>(c), zero, one));
  return out;
}

inline std::map<MinorIndex, Polynomial> minors(const Matrix<Polynomial>& M, std::size_t k) {
  const std::size_t nvars = M.empty() || M.front().empty() ? 0 : M.front().front().nvars();
  return minors(M, k, Polynomial(nvars), Polynomial::constant(nvars, 1));
}

}  // namespace jetlab
