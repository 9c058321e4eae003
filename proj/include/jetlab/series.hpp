#pragma once

/**
 * @file series.hpp
 * @brief Univariate power series in t truncated at order N.
 *
 * Coefficients are exact rationals stored sparsely. Besides the truncation
 * order the series carries an `exact` flag: it is true when no nonzero term
 * above N was ever discarded, i.e. the series is really a polynomial of
 * degree <= N. An exact series with no stored coefficient is identically
 * zero; an inexact one with no stored coefficient only vanishes up to N.
 */

#include <jetlab/order.hpp>
#include <jetlab/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jetlab {

class TruncatedSeries {
 public:
  using Term = std::pair<std::uint32_t, Rational>;

  TruncatedSeries() = default;
  explicit TruncatedSeries(std::uint32_t truncation) : n_(truncation) {}

  /// Dense constructor: coefficients for t^0 ... t^k (k <= N).
  TruncatedSeries(std::uint32_t truncation, const std::vector<Rational>& dense, bool exact)
      : n_(truncation), exact_(exact) {
    if (dense.size() > static_cast<std::size_t>(truncation) + 1)
      throw std::invalid_argument("more coefficients than the truncation allows");
    for (std::uint32_t k = 0; k < dense.size(); ++k)
      if (dense[k] != 0) terms_.emplace_back(k, dense[k]);
  }

  static TruncatedSeries zero(std::uint32_t truncation) { return TruncatedSeries(truncation); }

  static TruncatedSeries constant(std::uint32_t truncation, const Rational& c) {
    return monomial(truncation, 0, c);
  }

  static TruncatedSeries monomial(std::uint32_t truncation, std::uint32_t exponent, const Rational& c) {
    TruncatedSeries s(truncation);
    if (c == 0) return s;
    if (exponent > truncation) s.exact_ = false;
    else s.terms_.emplace_back(exponent, c);
    return s;
  }

  std::uint32_t truncation() const { return n_; }
  bool is_exact() const { return exact_; }
  bool is_exact_zero() const { return exact_ && terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  Rational coefficient(std::uint32_t k) const {
    for (const auto& [e, c] : terms_)
      if (e == k) return c;
    return 0;
  }

  /// Exponent of the highest stored term (0 for an empty series).
  std::uint32_t degree() const { return terms_.empty() ? 0 : terms_.back().first; }

  Order order() const {
    if (!terms_.empty()) return Order::finite(terms_.front().first);
    return exact_ ? Order::infinity() : Order::unknown();
  }

  friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    return combine(a, b, false);
  }

  friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
    return combine(a, b, true);
  }

  friend TruncatedSeries operator-(const TruncatedSeries& a) {
    TruncatedSeries out = a;
    for (auto& t : out.terms_) t.second = -t.second;
    return out;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    const std::uint32_t n = std::min(a.n_, b.n_);
    const TruncatedSeries& x = a.n_ == n ? a : a.truncated(n);
    const TruncatedSeries& y = b.n_ == n ? b : b.truncated(n);
    TruncatedSeries out(n);
    if (x.is_exact_zero() || y.is_exact_zero()) return out;
    out.exact_ = x.exact_ && y.exact_;
    if (x.terms_.empty() || y.terms_.empty()) {
      out.exact_ = false;
      return out;
    }
    std::vector<Rational> acc;
    std::vector<bool> used;
    const std::uint32_t lo = x.terms_.front().first + y.terms_.front().first;
    for (const auto& [ea, ca] : x.terms_) {
      for (const auto& [eb, cb] : y.terms_) {
        const std::uint32_t e = ea + eb;
        if (e > n) {
          out.exact_ = false;
          break;  // terms are sorted, later eb only grow
        }
        const std::size_t slot = e - lo;
        if (slot >= acc.size()) {
          acc.resize(slot + 1);
          used.resize(slot + 1, false);
        }
        acc[slot] += ca * cb;
        used[slot] = true;
      }
    }
    for (std::size_t s = 0; s < acc.size(); ++s)
      if (used[s] && acc[s] != 0) out.terms_.emplace_back(static_cast<std::uint32_t>(lo + s), acc[s]);
    return out;
  }

  TruncatedSeries& operator+=(const TruncatedSeries& o) { return *this = *this + o; }
  TruncatedSeries& operator*=(const TruncatedSeries& o) { return *this = *this * o; }

  TruncatedSeries operator*(const Rational& s) const {
    TruncatedSeries out = *this;
    if (s == 0) {
      out.terms_.clear();
      return out;
    }
    for (auto& t : out.terms_) t.second *= s;
    return out;
  }

  TruncatedSeries pow(unsigned k) const {
    TruncatedSeries result = constant(n_, 1);
    TruncatedSeries base = *this;
    while (k > 0) {
      if (k & 1u) result *= base;
      k >>= 1u;
      if (k > 0) base *= base;
    }
    return result;
  }

  /// Same series seen at a lower truncation order.
  TruncatedSeries truncated(std::uint32_t n) const {
    if (n >= n_) return *this;
    TruncatedSeries out(n);
    out.exact_ = exact_;
    for (const auto& t : terms_) {
      if (t.first <= n) out.terms_.push_back(t);
      else out.exact_ = false;
    }
    return out;
  }

  /// Substitutes t -> t^q; the truncation scales with q.
  TruncatedSeries reparametrized(std::uint32_t q) const {
    TruncatedSeries out(n_ * q);
    out.exact_ = exact_;
    for (const auto& [e, c] : terms_) out.terms_.emplace_back(e * q, c);
    return out;
  }

  double eval_double(double t) const {
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double term = c.get_d();
      for (std::uint32_t k = 0; k < e; ++k) term *= t;
      sum += term;
    }
    return sum;
  }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a.n_ == b.n_ && a.exact_ == b.exact_ && a.terms_ == b.terms_;
  }

 private:
  static TruncatedSeries combine(const TruncatedSeries& a, const TruncatedSeries& b, bool subtract) {
    const std::uint32_t n = std::min(a.n_, b.n_);
    const TruncatedSeries x = a.truncated(n);
    const TruncatedSeries y = b.truncated(n);
    TruncatedSeries out(n);
    out.exact_ = x.exact_ && y.exact_;
    auto i = x.terms_.begin();
    auto j = y.terms_.begin();
    while (i != x.terms_.end() || j != y.terms_.end()) {
      if (j == y.terms_.end() || (i != x.terms_.end() && i->first < j->first)) {
        out.terms_.push_back(*i++);
      } else if (i == x.terms_.end() || j->first < i->first) {
        out.terms_.emplace_back(j->first, subtract ? Rational(-j->second) : j->second);
        ++j;
      } else {
        Rational c = subtract ? Rational(i->second - j->second) : Rational(i->second + j->second);
        if (c != 0) out.terms_.emplace_back(i->first, c);
        ++i;
        ++j;
      }
    }
    return out;
  }

  std::uint32_t n_ = 0;
  std::vector<Term> terms_;  // sorted by exponent, nonzero coefficients
  bool exact_ = true;
};

}  // namespace jetlab
