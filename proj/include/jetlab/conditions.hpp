#pragma once

/**
 * @file conditions.hpp
 * @brief Sampling checks of the inequality conditions, Lojasiewicz exponent
 * estimation, and the merge of sampling evidence with arc scans.
 *
 * Every check minimizes a target on shells {d(x, Sigma) = eps} and fits
 * log(min) ~ alpha * log(eps) + log(C). The condition "target >~ d^e" is
 * supported when alpha_hat <= e + tol with a good fit.
 */

#include <jetlab/arc_engine.hpp>
#include <jetlab/linalg.hpp>
#include <jetlab/measures.hpp>
#include <jetlab/sigma.hpp>
#include <jetlab/verdict.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace jetlab {

using Target = std::function<double(std::span<const double>)>;
using Constraint = std::function<bool(std::span<const double>)>;

/// eps_k = 2^-k for k = first..last.
inline std::vector<double> shell_ladder(int first = 3, int last = 12) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

struct LojaConfig {
  std::vector<double> shells = shell_ladder();
  std::size_t samples_per_shell = 400;
  unsigned refine_steps = 80;
  /// Number of best samples per shell that are refined.
  std::size_t refine_candidates = 6;
  std::size_t drop_coarse = 2;
  double box_radius = 0.5;
  std::uint64_t seed = 0;
  ShellOptions shell_options{true, 0.5, 40};
  /// Optional restriction of the admissible points (horn membership).
  Constraint constraint;
};

struct LojaFit {
  std::vector<double> shells;
  std::vector<double> minima;
  std::vector<std::vector<double>> argmins;
  std::vector<std::size_t> samples;
  std::vector<bool> used;
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  double C_hat = std::numeric_limits<double>::quiet_NaN();
  double r2 = 0.0;
  bool conclusive = false;
  std::string note;
};

namespace detail {

/// Moves x back onto {d(x, Sigma) = eps} by rescaling the nearest piece.
inline bool project_to_shell(std::vector<double>& x, const SigmaSet& sigma, double eps) {
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sigma.pieces().size(); ++k) {
    const double d = sigma.piece_distance(k, x);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  if (!(dist > 0.0)) return false;
  for (auto i : sigma.pieces()[best]) x[i] *= eps / dist;
  return std::abs(sigma.distance(x) - eps) <= 1e-12 * eps;
}

/**
 * Derivative-free pattern search on the shell: coordinate moves of size
 * h_i (additive) projected back onto the shell; steps grow on success and
 * halve on failure.
 */
inline double refine_on_shell(const Target& target, const SigmaSet& sigma, double eps, double box, unsigned steps,
                              const Constraint& constraint, std::vector<double>& x) {
  double best = target(x);
  const std::size_t n = x.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = 0.5 * std::max(std::abs(x[i]), eps);
  for (unsigned it = 0; it < steps; ++it) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[i] += sign * h[i];
        if (std::abs(y[i]) > box) continue;
        if (!project_to_shell(y, sigma, eps)) continue;
        bool in_box = true;
        for (double v : y) in_box = in_box && std::abs(v) <= box;
        if (!in_box) continue;
        if (constraint && !constraint(y)) continue;
        const double v = target(y);
        if (v < best) {
          best = v;
          x = std::move(y);
          h[i] *= 1.5;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool tiny = true;
      for (std::size_t i = 0; i < n; ++i) {
        h[i] *= 0.5;
        tiny = tiny && h[i] < 1e-17 * std::max(std::abs(x[i]), eps);
      }
      if (tiny) break;
    }
  }
  return best;
}

}  // namespace detail

/**
 * Per-shell minimum of a nonnegative target (sampling plus pattern-search
 * refinement) and a least-squares fit of log min against log eps. The
 * coarsest `drop_coarse` shells are left out of the fit.
 */
inline LojaFit loja_exponent(const Target& target, const SigmaSet& sigma, const LojaConfig& cfg) {
  for (std::size_t k = 1; k < cfg.shells.size(); ++k)
    if (!(cfg.shells[k] < cfg.shells[k - 1])) throw std::invalid_argument("shells must be strictly decreasing");
  LojaFit fit;
  fit.shells = cfg.shells;
  for (std::size_t k = 0; k < cfg.shells.size(); ++k) {
    const double eps = cfg.shells[k];
    // Oversample when a constraint filters the draws.
    const std::size_t draw = cfg.constraint ? 4 * cfg.samples_per_shell : cfg.samples_per_shell;
    auto pts = sample_shell(sigma, eps, draw, cfg.box_radius, derive_seed(cfg.seed, k), cfg.shell_options);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t s = 0; s < pts.size(); ++s) {
      if (cfg.constraint && !cfg.constraint(pts[s])) continue;
      scored.emplace_back(target(pts[s]), s);
    }
    fit.samples.push_back(scored.size());
    if (scored.empty()) {
      fit.minima.push_back(std::numeric_limits<double>::quiet_NaN());
      fit.argmins.emplace_back();
      fit.used.push_back(false);
      continue;
    }
    std::sort(scored.begin(), scored.end());
    double best = scored.front().first;
    std::vector<double> arg = pts[scored.front().second];
    const std::size_t refine = std::min(cfg.refine_candidates, scored.size());
    for (std::size_t c = 0; c < refine && best > 0.0; ++c) {
      std::vector<double> x = pts[scored[c].second];
      const double v = detail::refine_on_shell(target, sigma, eps, cfg.box_radius, cfg.refine_steps, cfg.constraint, x);
      if (v < best) {
        best = v;
        arg = std::move(x);
      }
    }
    fit.minima.push_back(best);
    fit.argmins.push_back(std::move(arg));
    fit.used.push_back(k >= cfg.drop_coarse && best > 0.0 && std::isfinite(best));
  }

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < fit.shells.size(); ++k)
    if (fit.used[k]) {
      lx.push_back(std::log(fit.shells[k]));
      ly.push_back(std::log(fit.minima[k]));
    }
  bool zero_min = false;
  for (std::size_t k = cfg.drop_coarse; k < fit.minima.size(); ++k) zero_min = zero_min || fit.minima[k] == 0.0;
  if (zero_min) fit.note = "target vanishes on a shell: exponent undefined there";
  if (lx.size() < 3) {
    fit.conclusive = false;
    if (fit.note.empty()) fit.note = "fewer than 3 usable shells";
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.alpha_hat = sxy / sxx;
  fit.C_hat = std::exp(my - fit.alpha_hat * mx);
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.conclusive = !zero_min;
  return fit;
}

// ---------------------------------------------------------------------------
// Targets

/// kappa(dF(x)).
inline Target kappa_target(const PolyMap& F) {
  auto cf = std::make_shared<CompiledMap>(F);
  return [cf](std::span<const double> x) { return kuo_kappa(cf->jacobian(x)); };
}

/// d(x, Sigma) kappa(dF(x)) + |F(x)|.
inline Target ktilde_target(const PolyMap& F, const SigmaSet& sigma) {
  auto cf = std::make_shared<CompiledMap>(F);
  return [cf, sigma](std::span<const double> x) {
    return sigma.distance(x) * kuo_kappa(cf->jacobian(x)) + linalg::norm(cf->value(x));
  };
}

inline Target thom_target(const PolyMap& F, unsigned m = 2) {
  auto cf = std::make_shared<CompiledMap>(F);
  return [cf, m](std::span<const double> x) { return thom_quantity(*cf, x, m); };
}

inline Target sum_of_squares_target(const std::vector<Polynomial>& gens) {
  std::vector<CompiledPolynomial> cs;
  for (const auto& g : gens) cs.emplace_back(g);
  return [cs](std::span<const double> x) {
    double s = 0.0;
    for (const auto& c : cs) {
      const double v = c(x);
      s += v * v;
    }
    return s;
  };
}

// ---------------------------------------------------------------------------
// Checks

struct CheckConfig {
  LojaConfig loja;
  ScanOptions scan;
  double exponent_tol = 0.15;
  double min_r2 = 0.98;
  /// delta_hat must exceed this to count as positive evidence.
  double delta_margin = 0.15;
  bool run_arcs = true;
  bool run_sampling = true;
};

namespace detail {

inline void attach_fit(Verdict& v, const LojaFit& fit) {
  if (std::isfinite(fit.alpha_hat)) v.exponent = ExponentEstimate{fit.alpha_hat, fit.C_hat, fit.r2};
  for (std::size_t k = 0; k < fit.shells.size(); ++k)
    v.diagnostics.push_back(ShellRow{fit.shells[k], fit.minima[k], fit.argmins[k], fit.samples[k], fit.used[k]});
  if (!fit.note.empty()) v.notes.push_back(fit.note);
}

/// Point where target / d^e is smallest over the fitted shells.
inline std::optional<Witness> worst_point(const LojaFit& fit, double e) {
  std::optional<Witness> w;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fit.shells.size(); ++k) {
    if (fit.argmins[k].empty() || !std::isfinite(fit.minima[k])) continue;
    const double ratio = fit.minima[k] / std::pow(fit.shells[k], e);
    if (fit.minima[k] == 0.0 || (fit.used[k] && ratio < worst)) {
      worst = fit.minima[k] == 0.0 ? 0.0 : ratio;
      w = Witness{std::nullopt, std::nullopt, fit.argmins[k], fit.minima[k],
                  fit.minima[k] == 0.0 ? "target vanishes off Sigma" : "smallest target / d^e ratio"};
      if (fit.minima[k] == 0.0) break;
    }
  }
  return w;
}

/// A zero shell minimum off Sigma is a definite failure of "target >~ d^e".
inline bool has_zero_minimum(const LojaFit& fit, std::size_t drop) {
  for (std::size_t k = drop; k < fit.minima.size(); ++k)
    if (fit.minima[k] == 0.0) return true;
  return false;
}

/// Sampling verdict for "target >~ d^e".
inline Verdict sampling_verdict(const std::string& name, const Target& target, const SigmaSet& sigma, double e,
                                const CheckConfig& cfg) {
  Verdict v;
  v.condition = name;
  v.mode = Mode::sampling;
  v.seed = cfg.loja.seed;
  v.target_exponent = e;
  const LojaFit fit = loja_exponent(target, sigma, cfg.loja);
  attach_fit(v, fit);
  if (has_zero_minimum(fit, cfg.loja.drop_coarse)) {
    v.status = Status::fails_with_witness;
    v.witness = worst_point(fit, e);
    return v;
  }
  if (!fit.conclusive || fit.r2 < cfg.min_r2) {
    v.status = Status::inconclusive;
    if (fit.conclusive) v.notes.push_back("poor fit quality r2 = " + std::to_string(fit.r2));
    return v;
  }
  if (fit.alpha_hat <= e + cfg.exponent_tol) {
    v.status = Status::holds_on_evidence;
  } else {
    v.status = Status::fails_with_witness;
    v.witness = worst_point(fit, e);
  }
  return v;
}

/// Sampling verdict for "target >~ d^{base - delta}" with delta_hat = base - alpha_hat.
inline Verdict sampling_delta_verdict(const std::string& name, const Target& target, const SigmaSet& sigma,
                                      double base, const CheckConfig& cfg) {
  Verdict v;
  v.condition = name;
  v.mode = Mode::sampling;
  v.seed = cfg.loja.seed;
  v.target_exponent = base;
  const LojaFit fit = loja_exponent(target, sigma, cfg.loja);
  attach_fit(v, fit);
  if (has_zero_minimum(fit, cfg.loja.drop_coarse)) {
    v.status = Status::fails_with_witness;
    v.witness = worst_point(fit, base);
    return v;
  }
  if (!fit.conclusive || fit.r2 < cfg.min_r2) {
    v.status = Status::inconclusive;
    return v;
  }
  const double delta = std::min(base - fit.alpha_hat, base);
  v.delta_estimate = delta;
  if (delta > cfg.delta_margin) {
    v.status = Status::holds_on_evidence;
  } else if (delta < -cfg.delta_margin) {
    v.status = Status::fails_with_witness;
    v.witness = worst_point(fit, base);
  } else {
    v.status = Status::inconclusive;
    v.notes.push_back("delta_hat is within the margin of 0");
  }
  return v;
}

inline Verdict arc_verdict(const PolyMap& F, const SigmaSet& sigma, unsigned r, Condition c, const CheckConfig& cfg) {
  ScanOptions opt = cfg.scan;
  opt.condition = c;
  opt.r = r;
  return arc_scan(F, sigma, opt);
}

/**
 * Merges arc and sampling evidence. An exact arc witness decides failure.
 * A sampling failure with clear arcs is a disagreement (inconclusive),
 * unless the sampled target vanishes off Sigma, which is itself exact.
 */
inline Verdict combine(const std::string& name, std::optional<Verdict> arc, std::optional<Verdict> sampling) {
  Verdict v;
  v.condition = name;
  v.mode = Mode::combined;
  if (sampling) {
    v.exponent = sampling->exponent;
    v.target_exponent = sampling->target_exponent;
    v.delta_estimate = sampling->delta_estimate;
    v.diagnostics = sampling->diagnostics;
    v.seed = sampling->seed;
  }
  if (arc) {
    v.arc_delta_bound = arc->arc_delta_bound;
    v.extremal_slack = arc->extremal_slack;
    v.arcs_checked = arc->arcs_checked;
    v.seed = arc->seed;
  }
  const auto arc_status = arc ? std::optional<Status>(arc->status) : std::nullopt;
  const auto smp_status = sampling ? std::optional<Status>(sampling->status) : std::nullopt;
  const bool exact_point = sampling && sampling->status == Status::fails_with_witness && sampling->witness &&
                           sampling->witness->value && *sampling->witness->value == 0.0;

  if (arc_status == Status::fails_with_witness) {
    v.status = Status::fails_with_witness;
    v.witness = arc->witness;
    if (smp_status == Status::holds_on_evidence) v.notes.push_back("sampling did not detect the arc-level violation");
  } else if (smp_status == Status::fails_with_witness) {
    if (exact_point || !arc_status || arc_status == Status::inconclusive) {
      v.status = Status::fails_with_witness;
      v.witness = sampling->witness;
    } else {
      v.status = Status::inconclusive;
      v.notes.push_back("modes disagree: sampling suggests failure, arc scan found no violation");
    }
  } else if (smp_status.value_or(Status::holds_on_evidence) == Status::holds_on_evidence &&
             arc_status.value_or(Status::holds_on_evidence) == Status::holds_on_evidence && (arc || sampling)) {
    v.status = Status::holds_on_evidence;
  } else {
    v.status = Status::inconclusive;
  }
  if (arc) v.parts.push_back(*arc);
  if (sampling) v.parts.push_back(*sampling);
  return v;
}

inline void check_dims(const PolyMap& F, const SigmaSet& sigma) {
  if (F.nvars() != sigma.nvars()) throw std::invalid_argument("map and sigma have different nvars");
  if (F.nvars() < F.size()) throw std::invalid_argument("conditions need n >= p");
}

}  // namespace detail

/// Relative Kuiper-Kuo: kappa(dF) >~ d^{r-1}.
inline Verdict check_kuiper_kuo(const PolyMap& F, const SigmaSet& sigma, unsigned r, const CheckConfig& cfg = {}) {
  detail::check_dims(F, sigma);
  std::optional<Verdict> arc, smp;
  if (cfg.run_arcs) arc = detail::arc_verdict(F, sigma, r, Condition::kk, cfg);
  if (cfg.run_sampling) smp = detail::sampling_verdict("kk", kappa_target(F), sigma, static_cast<double>(r) - 1, cfg);
  return detail::combine("kk", arc, smp);
}

/// Second relative Kuiper-Kuo: kappa(dF) >~ d^{r-delta} for some delta > 0.
inline Verdict check_second_kuiper_kuo(const PolyMap& F, const SigmaSet& sigma, unsigned r,
                                       const CheckConfig& cfg = {}) {
  detail::check_dims(F, sigma);
  std::optional<Verdict> arc, smp;
  if (cfg.run_arcs) arc = detail::arc_verdict(F, sigma, r, Condition::kk_delta, cfg);
  if (cfg.run_sampling) smp = detail::sampling_delta_verdict("kk-delta", kappa_target(F), sigma, r, cfg);
  return detail::combine("kk-delta", arc, smp);
}

/// d kappa(dF) + |F| >~ d^r.
inline Verdict check_ktilde(const PolyMap& F, const SigmaSet& sigma, unsigned r, const CheckConfig& cfg = {}) {
  detail::check_dims(F, sigma);
  std::optional<Verdict> arc, smp;
  if (cfg.run_arcs) arc = detail::arc_verdict(F, sigma, r, Condition::ktilde, cfg);
  if (cfg.run_sampling) smp = detail::sampling_verdict("ktilde", ktilde_target(F, sigma), sigma, r, cfg);
  return detail::combine("ktilde", arc, smp);
}

/// d kappa(dF) + |F| >~ d^{r+1-delta} for some delta > 0.
inline Verdict check_ktilde_delta(const PolyMap& F, const SigmaSet& sigma, unsigned r, const CheckConfig& cfg = {}) {
  detail::check_dims(F, sigma);
  std::optional<Verdict> arc, smp;
  if (cfg.run_arcs) arc = detail::arc_verdict(F, sigma, r, Condition::ktilde_delta, cfg);
  if (cfg.run_sampling)
    smp = detail::sampling_delta_verdict("ktilde-delta", ktilde_target(F, sigma), sigma, static_cast<double>(r) + 1, cfg);
  return detail::combine("ktilde-delta", arc, smp);
}

/**
 * Relative Kuo condition in horn form: kappa(dF) >~ d^{r-1} on
 * {|F| <= w d^r, |x| < radius}, cross-checked against check_ktilde.
 */
inline Verdict check_kuo_horn(const PolyMap& F, const SigmaSet& sigma, unsigned r, const Rational& w,
                              const CheckConfig& cfg = {}, const Rational& radius = 1) {
  detail::check_dims(F, sigma);
  if (w <= 0) throw std::invalid_argument("horn width must be positive");
  auto cf = std::make_shared<CompiledMap>(F);
  const double wd = w.get_d();
  const double rad = radius.get_d();
  CheckConfig horn_cfg = cfg;
  horn_cfg.loja.constraint = [cf, r, wd, rad, sigma](std::span<const double> x) {
    return linalg::norm(x) < rad && horn_contains(x, *cf, r, wd, sigma);
  };
  Verdict horn = detail::sampling_verdict("kuo", kappa_target(F), sigma, static_cast<double>(r) - 1, horn_cfg);
  std::size_t in_horn = 0;
  for (const auto& row : horn.diagnostics) in_horn += row.samples;
  if (in_horn == 0) {
    horn.status = Status::inconclusive;
    horn.notes.push_back("no sample fell inside the horn");
  }
  const Verdict ktilde = check_ktilde(F, sigma, r, cfg);
  Verdict v = horn;
  v.mode = Mode::combined;
  v.parts = {horn, ktilde};
  if (horn.status == ktilde.status) {
    v.status = horn.status;
    if (!v.witness) v.witness = ktilde.witness;
  } else if (horn.status == Status::inconclusive) {
    v.status = ktilde.status;
    v.witness = ktilde.witness;
  } else if (ktilde.status == Status::inconclusive) {
    v.status = horn.status;
  } else {
    v.status = Status::inconclusive;
    v.witness.reset();
    v.notes.push_back("horn sampling and the K-tilde check disagree");
  }
  return v;
}

/// Thom type inequality T_2(F, x) >~ d^a.
inline Verdict thom_check(const PolyMap& F, const SigmaSet& sigma, double a, const CheckConfig& cfg = {}) {
  detail::check_dims(F, sigma);
  if (!(a > 0)) throw std::invalid_argument("thom exponent must be positive");
  Verdict v = detail::sampling_verdict("thom", thom_target(F, 2), sigma, a, cfg);
  return v;
}

/// Sum of squares of the generators >~ d^alpha for some alpha.
inline Verdict ellipticity_check(const std::vector<Polynomial>& generators, const SigmaSet& sigma,
                                 const CheckConfig& cfg = {}) {
  if (generators.empty()) throw std::invalid_argument("ellipticity needs at least one generator");
  for (const auto& g : generators)
    if (g.nvars() != sigma.nvars()) throw std::invalid_argument("generator and sigma have different nvars");
  Verdict v;
  v.condition = "elliptic";
  v.mode = Mode::sampling;
  v.seed = cfg.loja.seed;
  const LojaFit fit = loja_exponent(sum_of_squares_target(generators), sigma, cfg.loja);
  detail::attach_fit(v, fit);
  if (detail::has_zero_minimum(fit, cfg.loja.drop_coarse)) {
    v.status = Status::fails_with_witness;
    v.witness = detail::worst_point(fit, 0.0);
  } else if (fit.conclusive && fit.r2 >= cfg.min_r2) {
    v.status = Status::holds_on_evidence;
    v.target_exponent = fit.alpha_hat;
  } else {
    v.status = Status::inconclusive;
  }
  return v;
}

/// Generators of the Kuo ideal of a map: its components and the p-minors of dF.
inline std::vector<Polynomial> kuo_ideal_generators(const PolyMap& F) {
  std::vector<Polynomial> gens = F.components();
  for (auto& [idx, m] : minors(jacobian(F), F.size()))
    if (!m.is_zero()) gens.push_back(m);
  return gens;
}

// ---------------------------------------------------------------------------
// Witness re-verification

/// Target the named condition minimizes, for re-evaluating point witnesses.
inline Target condition_target(const std::string& name, const PolyMap& F, const SigmaSet& sigma) {
  if (name == "kk" || name == "kk-delta" || name == "kuo") return kappa_target(F);
  if (name == "ktilde" || name == "ktilde-delta") return ktilde_target(F, sigma);
  if (name == "thom") return thom_target(F, 2);
  if (name == "elliptic") return sum_of_squares_target(F.components());
  throw std::invalid_argument("no target for condition '" + name + "'");
}

/**
 * True when the witness of a failing verdict reproduces: an arc witness
 * is re-profiled exactly, a point witness is re-evaluated within 1e-9.
 * Verdicts that do not fail re-verify trivially.
 */
inline bool reverify_witness(const Verdict& v, const PolyMap& F, const SigmaSet& sigma, unsigned r) {
  if (v.status != Status::fails_with_witness) return true;
  if (!v.witness) return false;
  const Witness& w = *v.witness;
  if (w.arc) {
    const ArcProfile prof = profile_arc(F, *w.arc, sigma, r, w.profile ? w.profile->truncation : 0);
    if (w.profile && !(prof == *w.profile)) return false;
    Condition c = Condition::kk;
    try {
      c = condition_from_string(v.condition);
    } catch (const std::invalid_argument&) {
      c = Condition::ktilde;  // horn form is decided through K-tilde
    }
    return arc_violates(c, prof, r).violated == std::optional<bool>(true);
  }
  if (w.point && w.value) {
    const double again = condition_target(v.condition, F, sigma)(*w.point);
    return std::abs(again - *w.value) <= 1e-9 * std::max(1e-300, std::abs(*w.value)) ||
           (again == 0.0 && *w.value == 0.0);
  }
  return false;
}

}  // namespace jetlab
