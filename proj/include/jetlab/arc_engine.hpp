#pragma once

/**
 * @file arc_engine.hpp
 * @brief Exact order analysis of the inequality conditions along test arcs,
 * and a lattice search for arcs that violate them.
 *
 * Along an arc lambda, kappa(dF) has the order of
 *   (min order of the p-minors) - (min order of the (p-1)-minors),
 * since kappa and eta differ by bounded factors. |F o lambda| has the least
 * order of its components (a sum of real squares cannot cancel).
 */

#include <jetlab/arc.hpp>
#include <jetlab/minors.hpp>
#include <jetlab/polynomial.hpp>
#include <jetlab/random.hpp>
#include <jetlab/sigma.hpp>
#include <jetlab/verdict.hpp>

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace jetlab {

/// Jacobian minors of a map, computed once and reused for every arc.
class ArcAnalyzer {
 public:
  explicit ArcAnalyzer(PolyMap F) : F_(std::move(F)) {
    if (F_.nvars() < F_.size()) throw std::invalid_argument("arc analysis needs n >= p");
    const auto J = jacobian(F_);
    for (auto& [idx, m] : minors(J, F_.size())) top_.push_back(std::move(m));
    for (auto& [idx, m] : minors(J, F_.size() - 1)) sub_.push_back(std::move(m));
    degree_ = F_.total_degree();
  }

  const PolyMap& map() const { return F_; }
  const std::vector<Polynomial>& top_minors() const { return top_; }
  unsigned degree() const { return degree_; }

  std::uint32_t truncation_for(const Arc& arc, unsigned r) const {
    return default_truncation(r, degree_, arc.max_exponent());
  }

  Order kappa_order(const Arc& arc, std::uint32_t N) const {
    return min_order(top_, arc, N) - min_order(sub_, arc, N);
  }

  Order f_order(const Arc& arc, std::uint32_t N) const { return min_order(F_.components(), arc, N); }

  ArcProfile profile(const Arc& arc, const SigmaSet& sigma, unsigned r, std::uint32_t N = 0) const {
    if (arc.nvars() != F_.nvars()) throw std::invalid_argument("arc and map have different nvars");
    if (arc.is_zero()) throw std::invalid_argument("cannot profile the zero arc");
    if (N == 0) N = truncation_for(arc, r);
    ArcProfile prof;
    prof.truncation = N;
    prof.ord_d = distance_order_along_arc(arc, sigma);
    prof.inside_sigma = prof.ord_d.is_infinite();
    prof.ord_f = f_order(arc, N);
    prof.ord_kappa = kappa_order(arc, N);
    return prof;
  }

 private:
  static Order min_order(const std::vector<Polynomial>& polys, const Arc& arc, std::uint32_t N) {
    Order best = Order::infinity();
    for (const auto& p : polys) best = min(best, compose_arc(p, arc, N).order());
    return best;
  }

  PolyMap F_;
  std::vector<Polynomial> top_;
  std::vector<Polynomial> sub_;
  unsigned degree_ = 0;
};

/// Order of kappa(dF(lambda(t))) from the minors; +infinity under 0/0.
inline Order kappa_order_along_arc(const PolyMap& F, const Arc& arc, std::uint32_t N) {
  return ArcAnalyzer(F).kappa_order(arc, N);
}

/**
 * The same order from Gram determinants of the composed gradient rows:
 * kappa^2 = min_i G(all) / G(all but i), so
 * ord kappa = (ord G(all) - min_i ord G(all but i)) / 2.
 */
inline Order kappa_order_via_gram(const PolyMap& F, const Arc& arc, std::uint32_t N) {
  const auto J = jacobian(F);
  const std::size_t p = F.size();
  Matrix<TruncatedSeries> rows(p);
  for (std::size_t j = 0; j < p; ++j)
    for (const auto& entry : J[j]) rows[j].push_back(compose_arc(entry, arc, N));
  Matrix<TruncatedSeries> G(p, std::vector<TruncatedSeries>(p, TruncatedSeries::zero(N)));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t k = 0; k < rows[a].size(); ++k) G[a][b] += rows[a][k] * rows[b][k];
  const TruncatedSeries zero = TruncatedSeries::zero(N);
  const TruncatedSeries one = TruncatedSeries::constant(N, 1);
  std::vector<std::size_t> all(p);
  for (std::size_t i = 0; i < p; ++i) all[i] = i;
  const Order full = determinant(G, std::span<const std::size_t>(all), std::span<const std::size_t>(all), zero, one).order();
  Order others = Order::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) rest.push_back(j);
    others = min(others, determinant(G, std::span<const std::size_t>(rest), std::span<const std::size_t>(rest), zero, one).order());
  }
  const Order twice = full - others;
  if (!twice.is_finite()) return twice;
  if (twice.value() % 2 != 0) throw std::logic_error("odd order of kappa^2 along an arc");
  return Order::finite(twice.value() / 2);
}

inline ArcProfile profile_arc(const PolyMap& F, const Arc& arc, const SigmaSet& sigma, unsigned r, std::uint32_t N = 0) {
  return ArcAnalyzer(F).profile(arc, sigma, r, N);
}

struct ArcJudgement {
  /// nullopt when an order needed for the comparison is unknown.
  std::optional<bool> violated;
  /// (threshold - lhs) / ord_d; absent when lhs is +infinity or unknown.
  std::optional<Rational> slack;
  /// Largest delta this arc allows (delta forms only).
  std::optional<Rational> delta_bound;
};

/**
 * Decides one condition along one profiled arc.
 *   kk:           violated iff ord_kappa > (r-1) ord_d
 *   ktilde:       violated iff min(ord_d + ord_kappa, ord_f) > r ord_d
 *   kk_delta:     violated iff ord_kappa >= r ord_d; delta <= r - ord_kappa / ord_d
 *   ktilde_delta: violated iff min(...) >= (r+1) ord_d; delta <= r + 1 - min(...) / ord_d
 *   kz:           violated iff min(...) >= (r+1) ord_d
 */
inline ArcJudgement arc_violates(Condition condition, const ArcProfile& prof, unsigned r) {
  ArcJudgement out;
  if (prof.inside_sigma) {
    out.violated = false;
    return out;
  }
  if (!prof.ord_d.is_finite()) return out;
  const std::int64_t d = prof.ord_d.value();
  Order lhs;
  std::int64_t threshold = 0;
  bool strict = true;
  bool delta_form = false;
  switch (condition) {
    case Condition::kk:
      lhs = prof.ord_kappa;
      threshold = (static_cast<std::int64_t>(r) - 1) * d;
      break;
    case Condition::ktilde:
      lhs = prof.ord_ktilde_lhs();
      threshold = static_cast<std::int64_t>(r) * d;
      break;
    case Condition::kk_delta:
      lhs = prof.ord_kappa;
      threshold = static_cast<std::int64_t>(r) * d;
      strict = false;
      delta_form = true;
      break;
    case Condition::ktilde_delta:
      lhs = prof.ord_ktilde_lhs();
      threshold = (static_cast<std::int64_t>(r) + 1) * d;
      strict = false;
      delta_form = true;
      break;
    case Condition::kz:
      lhs = prof.ord_ktilde_lhs();
      threshold = (static_cast<std::int64_t>(r) + 1) * d;
      strict = false;
      break;
  }
  if (lhs.is_unknown()) return out;
  if (lhs.is_infinite()) {
    out.violated = true;
    return out;
  }
  out.violated = strict ? lhs.value() > threshold : lhs.value() >= threshold;
  out.slack = make_rational(threshold - lhs.value(), d);
  if (delta_form) out.delta_bound = out.slack;
  return out;
}

// ---------------------------------------------------------------------------
// Witness search

/// Nonzero rational roots of sum_k coeffs[k] c^k (rational root theorem).
inline std::vector<Rational> rational_roots(std::vector<Rational> coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  std::size_t low = 0;
  while (low < coeffs.size() && coeffs[low] == 0) ++low;
  if (coeffs.size() <= low + 1) return {};
  Integer lcm = 1;
  for (const auto& c : coeffs) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.get_den().get_mpz_t());
  std::vector<Integer> a;
  for (std::size_t k = low; k < coeffs.size(); ++k) a.push_back(Integer(coeffs[k] * lcm));
  auto divisors = [](Integer v) -> std::optional<std::vector<Integer>> {
    v = abs(v);
    if (v > Integer("1000000000000")) return std::nullopt;
    std::vector<Integer> out;
    for (Integer d = 1; d * d <= v; ++d)
      if (v % d == 0) {
        out.push_back(d);
        if (d * d != v) out.push_back(v / d);
      }
    return out;
  };
  const auto ps = divisors(a.front());
  const auto qs = divisors(a.back());
  if (!ps || !qs) return {};
  std::set<Rational> roots;
  for (const auto& pp : *ps)
    for (const auto& qq : *qs)
      for (int sign : {1, -1}) {
        Rational cand(pp * sign, qq);
        cand.canonicalize();
        Rational acc = 0;
        for (std::size_t k = a.size(); k-- > 0;) acc = acc * cand + Rational(a[k]);
        if (acc == 0) roots.insert(cand);
      }
  return {roots.begin(), roots.end()};
}

/// Coefficients (monomial basis) of the polynomial through (xs[k], ys[k]).
inline std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  const std::size_t n = xs.size();
  std::vector<Rational> dd = ys;
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t k = n - 1; k + 1 > level; --k) dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - level]);
  std::vector<Rational> poly{dd[n - 1]};
  for (std::size_t k = n - 1; k-- > 0;) {
    // poly = poly * (c - xs[k]) + dd[k]
    std::vector<Rational> next(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= poly[i] * xs[k];
    }
    next[0] += dd[k];
    poly = std::move(next);
  }
  return poly;
}

/**
 * Coefficient values c for which the leading t-coefficient of some target
 * polynomial along build(c) cancels. The t-coefficients are polynomials in
 * c of degree <= `degree`; they are recovered by interpolation.
 */
inline std::vector<Rational> resonant_coefficients(const std::vector<Polynomial>& targets,
                                                   const std::function<Arc(const Rational&)>& build, unsigned degree,
                                                   std::uint32_t N) {
  std::vector<Rational> xs;
  for (unsigned k = 0; k <= degree; ++k) xs.emplace_back(static_cast<long>(k) + 1);
  std::set<Rational> found;
  std::vector<Arc> arcs;
  for (const auto& x : xs) arcs.push_back(build(x));
  for (const auto& target : targets) {
    std::vector<TruncatedSeries> series;
    std::uint32_t lowest = std::numeric_limits<std::uint32_t>::max();
    for (const auto& arc : arcs) {
      series.push_back(compose_arc(target, arc, N));
      if (!series.back().terms().empty()) lowest = std::min(lowest, series.back().terms().front().first);
    }
    if (lowest == std::numeric_limits<std::uint32_t>::max()) continue;
    std::vector<Rational> ys;
    for (const auto& s : series) ys.push_back(s.coefficient(lowest));
    for (const auto& root : rational_roots(interpolate(xs, ys))) found.insert(root);
  }
  return {found.begin(), found.end()};
}

struct ScanOptions {
  Condition condition = Condition::kk;
  unsigned r = 3;
  std::uint32_t max_exponent = 12;
  unsigned terms = 1;
  bool unit = true;       // coefficients from {1, -1, 2, -2}
  bool resonance = true;  // coefficients solving a leading cancellation
  bool generic = true;    // seeded random rationals
  std::size_t generic_draws = 1;
  std::uint64_t seed = 0;
  std::size_t max_arcs = 1'000'000;
  std::uint32_t truncation = 0;  // 0: default per arc
};

namespace detail {

inline const std::vector<Rational>& unit_coefficients() {
  static const std::vector<Rational> units{1, -1, 2, -2};
  return units;
}

inline Rational generic_coefficient(Rng& rng) {
  std::uniform_int_distribution<long> num(1, 9);
  std::uniform_int_distribution<long> den(1, 9);
  const long p = num(rng) * ((rng() & 1u) ? -1 : 1);
  return make_rational(p, den(rng));
}

/// All tuples in {0..E}^n except zero, in lexicographic order.
inline std::vector<std::vector<std::uint32_t>> exponent_tuples(std::size_t n, std::uint32_t E) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur(n, 0);
  while (true) {
    if (std::any_of(cur.begin(), cur.end(), [](std::uint32_t e) { return e != 0; })) out.push_back(cur);
    std::size_t i = n;
    while (i > 0 && cur[i - 1] == E) cur[--i] = 0;
    if (i == 0) break;
    ++cur[i - 1];
  }
  return out;
}

inline std::size_t power(std::size_t base, std::size_t exp) {
  std::size_t v = 1;
  for (std::size_t k = 0; k < exp; ++k) v *= base;
  return v;
}

}  // namespace detail

/// Upper bound on the number of arcs arc_scan would visit.
inline std::size_t arc_scan_size(std::size_t nvars, unsigned degree, const ScanOptions& opt) {
  std::size_t total = 0;
  const std::size_t per_coeff_extra = opt.terms >= 2 ? nvars * opt.max_exponent * (4 + degree) : 0;
  for (const auto& tuple : detail::exponent_tuples(nvars, opt.max_exponent)) {
    const std::size_t k = static_cast<std::size_t>(std::count_if(tuple.begin(), tuple.end(), [](auto e) { return e != 0; }));
    std::size_t base = 0;
    if (opt.unit) base += detail::power(4, k);
    if (opt.resonance) base += k * degree * 4;
    if (opt.generic) base += opt.generic_draws;
    total += base * (1 + per_coeff_extra);
    if (total > std::numeric_limits<std::size_t>::max() / 4) return total;
  }
  return total;
}

/**
 * Enumerates arcs over the exponent lattice and reports the first one (in
 * enumeration order) violating the condition. Order: exponent tuples
 * lexicographically; per tuple unit coefficients, then resonant ones, then
 * generic draws; with terms = 2 each base arc is followed by its one-term
 * extensions. Evidence only: a clean scan proves nothing.
 */
inline Verdict arc_scan(const PolyMap& F, const SigmaSet& sigma, const ScanOptions& opt) {
  if (opt.max_exponent < 1) throw std::invalid_argument("max_exponent must be >= 1");
  if (opt.terms < 1 || opt.terms > 2) throw std::invalid_argument("terms per component must be 1 or 2");
  if (sigma.nvars() != F.nvars()) throw std::invalid_argument("map and sigma have different nvars");
  const ArcAnalyzer analyzer(F);
  const std::size_t n = F.nvars();
  const std::size_t estimate = arc_scan_size(n, analyzer.degree(), opt);
  if (estimate > opt.max_arcs)
    throw std::length_error("arc lattice too large: about " + std::to_string(estimate) + " arcs exceed the cap of " +
                            std::to_string(opt.max_arcs));

  Verdict v;
  v.condition = to_string(opt.condition);
  v.mode = Mode::arc;
  v.seed = opt.seed;
  std::size_t unknown = 0;
  bool found = false;

  std::vector<Polynomial> targets = analyzer.top_minors();
  for (const auto& f : F.components()) targets.push_back(f);
  const unsigned degree = std::max(1u, analyzer.degree());

  auto visit = [&](const Arc& arc) {
    if (found) return;
    if (++v.arcs_checked > opt.max_arcs) throw std::length_error("arc lattice too large: cap exceeded");
    const ArcProfile prof = analyzer.profile(arc, sigma, opt.r, opt.truncation);
    if (prof.inside_sigma) return;
    const ArcJudgement j = arc_violates(opt.condition, prof, opt.r);
    if (!j.violated) {
      ++unknown;
      return;
    }
    if (j.slack && (!v.extremal_slack || *j.slack < *v.extremal_slack)) v.extremal_slack = j.slack;
    if (j.delta_bound && (!v.arc_delta_bound || *j.delta_bound < *v.arc_delta_bound)) v.arc_delta_bound = j.delta_bound;
    if (*j.violated) {
      found = true;
      v.status = Status::fails_with_witness;
      v.witness = Witness{arc, prof, std::nullopt, std::nullopt, "violating arc"};
    }
  };

  auto truncation = [&](std::uint32_t max_exp) {
    return opt.truncation ? opt.truncation : default_truncation(opt.r, analyzer.degree(), max_exp);
  };

  auto build = [n](const std::vector<std::uint32_t>& exps, const std::vector<Rational>& coeffs) {
    std::vector<Arc::Component> comps(n);
    for (std::size_t i = 0; i < n; ++i)
      if (exps[i] > 0) comps[i].push_back({exps[i], coeffs[i]});
    return Arc(std::move(comps));
  };

  // One-term extensions of a base arc, coefficient from the unit set or
  // solving the next leading cancellation.
  auto extend = [&](const Arc& base) {
    for (std::size_t i = 0; i < n && !found; ++i) {
      const auto& comp = base.component(i);
      if (comp.empty()) continue;
      for (std::uint32_t e = comp.back().exponent + 1; e <= opt.max_exponent && !found; ++e) {
        auto with = [&](const Rational& c) {
          auto comps = base.components();
          comps[i].push_back({e, c});
          return Arc(std::move(comps));
        };
        std::vector<Rational> coeffs;
        if (opt.unit) coeffs = detail::unit_coefficients();
        if (opt.resonance)
          for (const auto& c : resonant_coefficients(targets, with, degree, truncation(opt.max_exponent)))
            if (std::find(coeffs.begin(), coeffs.end(), c) == coeffs.end()) coeffs.push_back(c);
        for (const auto& c : coeffs) {
          if (found) break;
          visit(with(c));
        }
      }
    }
  };

  const auto tuples = detail::exponent_tuples(n, opt.max_exponent);
  for (std::size_t t = 0; t < tuples.size() && !found; ++t) {
    const auto& exps = tuples[t];
    std::vector<std::size_t> nonzero;
    for (std::size_t i = 0; i < n; ++i)
      if (exps[i] > 0) nonzero.push_back(i);
    std::set<std::vector<Rational>> seen;
    std::vector<std::vector<Rational>> candidates;
    auto add = [&](std::vector<Rational> c) {
      if (seen.insert(c).second) candidates.push_back(std::move(c));
    };
    if (opt.unit) {
      const auto& units = detail::unit_coefficients();
      const std::size_t combos = detail::power(units.size(), nonzero.size());
      for (std::size_t code = 0; code < combos; ++code) {
        std::vector<Rational> c(n, 1);
        std::size_t rest = code;
        for (std::size_t k = nonzero.size(); k-- > 0;) {
          c[nonzero[k]] = units[rest % units.size()];
          rest /= units.size();
        }
        add(std::move(c));
      }
    }
    if (opt.resonance) {
      for (auto j : nonzero) {
        auto with = [&](const Rational& x) {
          std::vector<Rational> c(n, 1);
          c[j] = x;
          return build(exps, c);
        };
        const std::uint32_t max_e = *std::max_element(exps.begin(), exps.end());
        for (const auto& root : resonant_coefficients(targets, with, degree, truncation(max_e))) {
          std::vector<Rational> c(n, 1);
          c[j] = root;
          add(std::move(c));
        }
      }
    }
    if (opt.generic) {
      Rng rng(derive_seed(opt.seed, t));
      for (std::size_t k = 0; k < opt.generic_draws; ++k) {
        std::vector<Rational> c(n, 1);
        for (auto i : nonzero) c[i] = detail::generic_coefficient(rng);
        add(std::move(c));
      }
    }
    for (const auto& c : candidates) {
      if (found) break;
      const Arc base = build(exps, c);
      visit(base);
      if (opt.terms >= 2 && !found) extend(base);
    }
  }

  if (!found) v.status = unknown > 0 ? Status::inconclusive : Status::holds_on_evidence;
  if (unknown > 0) v.notes.push_back(std::to_string(unknown) + " arc(s) had orders beyond the truncation");
  return v;
}

}  // namespace jetlab
