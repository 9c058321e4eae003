#pragma once

/**
 * @file polynomial.hpp
 * @brief Exact multivariate polynomials over the rationals.
 *
 * Terms are stored in a map keyed by dense exponent vectors, so iteration is
 * in lexicographic exponent order and no zero coefficient is ever stored.
 * A PolyMap is a list of polynomials sharing the same variable count; it is
 * the representation of a polynomial map-germ (R^n, 0) -> (R^p, 0).
 */

#include <jetlab/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jetlab {

using Exponent = std::vector<std::uint32_t>;

class Polynomial {
 public:
  using TermMap = std::map<Exponent, Rational>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Exponent(nvars, 0), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t index) {
    if (index >= nvars) throw std::out_of_range("variable index out of range");
    Exponent e(nvars, 0);
    e[index] = 1;
    Polynomial p(nvars);
    p.add_term(std::move(e), Rational(1));
    return p;
  }

  static Polynomial monomial(Exponent e, const Rational& c) {
    Polynomial p(e.size());
    p.add_term(std::move(e), c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Maximum total degree; 0 for the zero polynomial.
  unsigned total_degree() const {
    unsigned best = 0;
    for (const auto& [e, c] : terms_) {
      unsigned d = 0;
      for (auto a : e) d += a;
      best = std::max(best, d);
    }
    return best;
  }

  unsigned degree_in(std::size_t var) const {
    unsigned best = 0;
    for (const auto& [e, c] : terms_) best = std::max<unsigned>(best, e[var]);
    return best;
  }

  Rational coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Accumulates c * x^e; drops the term if the coefficient cancels.
  void add_term(Exponent e, const Rational& c) {
    if (e.size() != nvars_) throw std::invalid_argument("exponent length does not match nvars");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    Polynomial out(a.nvars_);
    Exponent e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        out.add_term(e, ca * cb);
      }
    }
    return out;
  }

  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned k) const {
    Polynomial result = constant(nvars_, 1);
    Polynomial base = *this;
    while (k > 0) {
      if (k & 1u) result *= base;
      k >>= 1u;
      if (k > 0) base *= base;
    }
    return result;
  }

  Rational eval(std::span<const Rational> point) const {
    if (point.size() != nvars_) throw std::invalid_argument("point dimension does not match nvars");
    Rational sum = 0;
    for (const auto& [e, c] : terms_) {
      Rational term = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        if (e[i] != 0) term *= jetlab::pow(point[i], e[i]);
      sum += term;
    }
    return sum;
  }

  double eval_double(std::span<const double> point) const {
    if (point.size() != nvars_) throw std::invalid_argument("point dimension does not match nvars");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double term = c.get_d();
      for (std::size_t i = 0; i < nvars_; ++i)
        if (e[i] != 0) term *= std::pow(point[i], static_cast<int>(e[i]));
      sum += term;
    }
    return sum;
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw std::invalid_argument("polynomials have different nvars");
  }

  std::size_t nvars_ = 0;
  TermMap terms_;
};

/// Formal partial derivative with respect to variable `var`.
inline Polynomial partial(const Polynomial& f, std::size_t var) {
  if (var >= f.nvars()) throw std::out_of_range("partial: variable index out of range");
  Polynomial out(f.nvars());
  for (const auto& [e, c] : f.terms()) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    out.add_term(std::move(d), c * Rational(e[var]));
  }
  return out;
}

/// Substitutes x_var = 0.
inline Polynomial restrict_zero(const Polynomial& f, std::size_t var) {
  Polynomial out(f.nvars());
  for (const auto& [e, c] : f.terms())
    if (e[var] == 0) out.add_term(e, c);
  return out;
}

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// A polynomial map (f_1, ..., f_p) : R^n -> R^p.
class PolyMap {
 public:
  PolyMap() = default;
  explicit PolyMap(std::vector<Polynomial> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("a map needs at least one component");
    for (const auto& c : components_)
      if (c.nvars() != components_.front().nvars())
        throw std::invalid_argument("map components have different nvars");
  }

  std::size_t nvars() const { return components_.empty() ? 0 : components_.front().nvars(); }
  std::size_t size() const { return components_.size(); }
  const Polynomial& operator[](std::size_t j) const { return components_[j]; }
  const std::vector<Polynomial>& components() const { return components_; }

  unsigned total_degree() const {
    unsigned d = 0;
    for (const auto& c : components_) d = std::max(d, c.total_degree());
    return d;
  }

  friend PolyMap operator+(const PolyMap& a, const PolyMap& b) { return zip(a, b, 1); }
  friend PolyMap operator-(const PolyMap& a, const PolyMap& b) { return zip(a, b, -1); }
  friend bool operator==(const PolyMap& a, const PolyMap& b) { return a.components_ == b.components_; }

 private:
  static PolyMap zip(const PolyMap& a, const PolyMap& b, int sign) {
    if (a.size() != b.size()) throw std::invalid_argument("maps have different target dimension");
    std::vector<Polynomial> out;
    out.reserve(a.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      out.push_back(sign > 0 ? a[j] + b[j] : a[j] - b[j]);
    return PolyMap(std::move(out));
  }

  std::vector<Polynomial> components_;
};

/// Entry (j, i) is dF_j / dx_i.
inline Matrix<Polynomial> jacobian(const PolyMap& F) {
  Matrix<Polynomial> J(F.size());
  for (std::size_t j = 0; j < F.size(); ++j) {
    J[j].reserve(F.nvars());
    for (std::size_t i = 0; i < F.nvars(); ++i) J[j].push_back(partial(F[j], i));
  }
  return J;
}

/// Polynomial precompiled for fast floating-point evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()) {
    coeffs_.reserve(p.term_count());
    exps_.reserve(p.term_count() * nvars_);
    for (const auto& [e, c] : p.terms()) {
      coeffs_.push_back(c.get_d());
      for (std::size_t i = 0; i < nvars_; ++i) exps_.push_back(e[i]);
    }
  }

  std::size_t nvars() const { return nvars_; }

  double operator()(std::span<const double> x) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      double term = coeffs_[t];
      const std::uint32_t* e = exps_.data() + t * nvars_;
      for (std::size_t i = 0; i < nvars_; ++i) {
        for (std::uint32_t k = 0; k < e[i]; ++k) term *= x[i];
      }
      sum += term;
    }
    return sum;
  }

 private:
  std::size_t nvars_ = 0;
  std::vector<double> coeffs_;
  std::vector<std::uint32_t> exps_;
};

/// A map together with its Jacobian, compiled for double evaluation.
class CompiledMap {
 public:
  CompiledMap() = default;
  explicit CompiledMap(const PolyMap& F) : nvars_(F.nvars()) {
    auto J = ::jetlab::jacobian(F);
    for (std::size_t j = 0; j < F.size(); ++j) {
      values_.emplace_back(F[j]);
      std::vector<CompiledPolynomial> row;
      for (const auto& entry : J[j]) row.emplace_back(entry);
      jac_.push_back(std::move(row));
    }
  }

  std::size_t nvars() const { return nvars_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double> value(std::span<const double> x) const {
    std::vector<double> out(values_.size());
    for (std::size_t j = 0; j < values_.size(); ++j) out[j] = values_[j](x);
    return out;
  }

  /// Rows are the gradients of the components.
  std::vector<std::vector<double>> jacobian(std::span<const double> x) const {
    std::vector<std::vector<double>> out(jac_.size(), std::vector<double>(nvars_));
    for (std::size_t j = 0; j < jac_.size(); ++j)
      for (std::size_t i = 0; i < nvars_; ++i) out[j][i] = jac_[j][i](x);
    return out;
  }

 private:
  std::size_t nvars_ = 0;
  std::vector<CompiledPolynomial> values_;
  std::vector<std::vector<CompiledPolynomial>> jac_;
};

}  // namespace jetlab
