#pragma once

// Test arcs t -> (lambda_1(t), ..., lambda_n(t)) with finitely many terms per
// component, and substitution of polynomials into them.

#include <jetlab/polynomial.hpp>
#include <jetlab/series.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jetlab {

struct ArcTerm {
  std::uint32_t exponent = 1;
  Rational coefficient = 1;

  friend bool operator==(const ArcTerm&, const ArcTerm&) = default;
};

class Arc {
 public:
  using Component = std::vector<ArcTerm>;

  Arc() = default;
  explicit Arc(std::vector<Component> components) : components_(std::move(components)) {
    for (const auto& comp : components_) {
      for (std::size_t k = 0; k < comp.size(); ++k) {
        if (comp[k].exponent < 1) throw std::invalid_argument("arc exponents must be >= 1");
        if (comp[k].coefficient == 0) throw std::invalid_argument("arc coefficients must be nonzero");
        if (k > 0 && comp[k].exponent <= comp[k - 1].exponent)
          throw std::invalid_argument("arc exponents must strictly increase");
      }
    }
  }

  /// Single-term arc (c_1 t^{e_1}, ..., c_n t^{e_n}); exponent 0 means the zero component.
  static Arc monomial(const std::vector<std::uint32_t>& exponents, const std::vector<Rational>& coeffs = {}) {
    std::vector<Component> comps(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i)
      if (exponents[i] > 0)
        comps[i].push_back({exponents[i], coeffs.empty() ? Rational(1) : coeffs[i]});
    return Arc(std::move(comps));
  }

  std::size_t nvars() const { return components_.size(); }
  const Component& component(std::size_t i) const { return components_[i]; }
  const std::vector<Component>& components() const { return components_; }

  bool is_zero() const {
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) { return c.empty(); });
  }

  std::uint32_t max_exponent() const {
    std::uint32_t m = 0;
    for (const auto& c : components_)
      if (!c.empty()) m = std::max(m, c.back().exponent);
    return m;
  }

  /// Order of one component (infinity for an identically-zero component).
  Order component_order(std::size_t i) const {
    return components_[i].empty() ? Order::infinity() : Order::finite(components_[i].front().exponent);
  }

  TruncatedSeries component_series(std::size_t i, std::uint32_t truncation) const {
    TruncatedSeries s(truncation);
    for (const auto& t : components_[i]) s += TruncatedSeries::monomial(truncation, t.exponent, t.coefficient);
    return s;
  }

  std::vector<double> eval_double(double t) const {
    std::vector<double> x(components_.size(), 0.0);
    for (std::size_t i = 0; i < components_.size(); ++i)
      for (const auto& term : components_[i]) x[i] += term.coefficient.get_d() * std::pow(t, term.exponent);
    return x;
  }

  /// Substitutes t -> t^q.
  Arc reparametrized(std::uint32_t q) const {
    std::vector<Component> comps = components_;
    for (auto& c : comps)
      for (auto& t : c) t.exponent *= q;
    return Arc(std::move(comps));
  }

  friend bool operator==(const Arc&, const Arc&) = default;

 private:
  std::vector<Component> components_;
};

/// Series of f(lambda(t)), exact through degree `truncation`.
inline TruncatedSeries compose_arc(const Polynomial& f, const Arc& arc, std::uint32_t truncation) {
  if (arc.nvars() != f.nvars()) throw std::invalid_argument("arc and polynomial have different nvars");
  const std::size_t n = f.nvars();
  std::vector<std::vector<TruncatedSeries>> powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned deg = f.degree_in(i);
    powers[i].reserve(deg + 1);
    powers[i].push_back(TruncatedSeries::constant(truncation, 1));
    if (deg == 0) continue;
    const TruncatedSeries base = arc.component_series(i, truncation);
    for (unsigned k = 1; k <= deg; ++k) powers[i].push_back(powers[i].back() * base);
  }
  TruncatedSeries sum(truncation);
  for (const auto& [e, c] : f.terms()) {
    TruncatedSeries term = TruncatedSeries::constant(truncation, c);
    for (std::size_t i = 0; i < n && !term.is_exact_zero(); ++i)
      if (e[i] != 0) term *= powers[i][e[i]];
    sum += term;
  }
  return sum;
}

inline std::vector<TruncatedSeries> compose_arc(const PolyMap& F, const Arc& arc, std::uint32_t truncation) {
  std::vector<TruncatedSeries> out;
  out.reserve(F.size());
  for (const auto& f : F.components()) out.push_back(compose_arc(f, arc, truncation));
  return out;
}

/// Default truncation 4 * r * (max total degree) * (max arc exponent).
inline std::uint32_t default_truncation(unsigned r, unsigned max_degree, std::uint32_t max_arc_exponent) {
  const std::uint64_t n = 4ull * std::max(1u, r) * std::max(1u, max_degree) * std::max<std::uint32_t>(1, max_arc_exponent);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(n, 1u << 20));
}

}  // namespace jetlab
