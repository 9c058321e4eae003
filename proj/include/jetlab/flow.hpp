#pragma once

/**
 * @file flow.hpp
 * @brief Kuo vector field for F(x, t) = f(x) + t h(x), h = g - f, and its
 * numerical integration.
 *
 * The spatial velocity v = -sum_j h_j N_j / |N_j|^2, where N_j is grad_x F_j
 * minus its projection onto the span of the other gradients, makes every
 * F_j(x(t), t) constant along trajectories. On Sigma the velocity is 0.
 */

#include <jetlab/jet.hpp>
#include <jetlab/linalg.hpp>
#include <jetlab/polynomial.hpp>
#include <jetlab/random.hpp>
#include <jetlab/sigma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetlab {

/// Raised when the gradients degenerate off Sigma where h does not vanish.
class DegenerateGradient : public std::runtime_error {
 public:
  DegenerateGradient(std::vector<double> x, double t)
      : std::runtime_error("degenerate gradients off Sigma"), x_(std::move(x)), t_(t) {}
  const std::vector<double>& point() const { return x_; }
  double time() const { return t_; }

 private:
  std::vector<double> x_;
  double t_;
};

class FlowProblem {
 public:
  FlowProblem(PolyMap f, PolyMap g, SigmaSet sigma, unsigned r, double radius = 1.0)
      : f_(std::move(f)), g_(std::move(g)), sigma_(std::move(sigma)), r_(r), radius_(radius) {
    if (f_.size() != g_.size() || f_.nvars() != g_.nvars()) throw std::invalid_argument("f and g have different shapes");
    if (f_.nvars() != sigma_.nvars()) throw std::invalid_argument("map and sigma have different nvars");
    if (f_.nvars() < f_.size()) throw std::invalid_argument("flow needs n >= p");
    if (!(radius_ > 0)) throw std::invalid_argument("region radius must be positive");
    std::vector<Polynomial> h;
    for (std::size_t j = 0; j < f_.size(); ++j) h.push_back(g_[j] - f_[j]);
    h_ = PolyMap(std::move(h));
    if (!jet_vanishes_on_sigma(h_, sigma_, r_))
      throw std::invalid_argument("g - f does not have vanishing r-jet on Sigma");
    cf_.emplace(f_);
    ch_.emplace(h_);
  }

  const PolyMap& f() const { return f_; }
  const PolyMap& g() const { return g_; }
  const PolyMap& h() const { return h_; }
  const SigmaSet& sigma() const { return sigma_; }
  unsigned r() const { return r_; }
  double radius() const { return radius_; }
  std::size_t nvars() const { return f_.nvars(); }
  std::size_t size() const { return f_.size(); }

  std::vector<double> value(std::span<const double> x, double t) const {
    auto v = cf_->value(x);
    const auto hv = ch_->value(x);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += t * hv[j];
    return v;
  }

  std::vector<double> h_value(std::span<const double> x) const { return ch_->value(x); }

  /// Rows are grad_x F_j(x, t).
  linalg::Mat gradients(std::span<const double> x, double t) const {
    auto G = cf_->jacobian(x);
    const auto H = ch_->jacobian(x);
    for (std::size_t j = 0; j < G.size(); ++j)
      for (std::size_t i = 0; i < G[j].size(); ++i) G[j][i] += t * H[j][i];
    return G;
  }

 private:
  PolyMap f_, g_, h_;
  SigmaSet sigma_;
  unsigned r_;
  double radius_;
  std::optional<CompiledMap> cf_, ch_;
};

struct FlowOptions {
  /// Largest step in t; the scheme is RK4, so halving it divides the error by about 16.
  double step_cap = 1e-3;
  /// Steps also obey dt <= step_fraction * d(x, Sigma) / |v|.
  double step_fraction = 0.1;
  /// Integration stops when d(x, Sigma) drops below this.
  double sigma_floor = 1e-300;
  /// |N_j| must be at least degeneracy_factor * d^{r-1} where h_j != 0.
  double degeneracy_factor = 1e-10;
  double min_step = 1e-14;
  std::size_t max_steps = 5'000'000;
};

/// Spatial velocity of the Kuo field at (x, t).
inline std::vector<double> kuo_field(const FlowProblem& P, std::span<const double> x, double t,
                                     const FlowOptions& opt = {}) {
  const std::size_t n = P.nvars(), p = P.size();
  std::vector<double> v(n, 0.0);
  const double d = P.sigma().distance(x);
  if (d == 0.0) return v;
  const auto hv = P.h_value(x);
  if (std::all_of(hv.begin(), hv.end(), [](double a) { return a == 0.0; })) return v;
  const auto G = P.gradients(x, t);
  const double floor = opt.degeneracy_factor * std::pow(d, static_cast<double>(P.r()) - 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (hv[j] == 0.0) continue;
    linalg::Mat others;
    for (std::size_t k = 0; k < p; ++k)
      if (k != j) others.push_back(G[k]);
    const auto N = linalg::residual_from_span(G[j], others);
    const double nn = linalg::dot(N, N);
    if (!(std::sqrt(nn) >= floor) || nn == 0.0) throw DegenerateGradient({x.begin(), x.end()}, t);
    for (std::size_t i = 0; i < n; ++i) v[i] -= hv[j] * N[i] / nn;
  }
  return v;
}

enum class FlowStatus { completed, reached_sigma_floor, left_region, step_underflow, degenerate_gradient, step_limit };

inline std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::reached_sigma_floor: return "reached-sigma-floor";
    case FlowStatus::left_region: return "left-region";
    case FlowStatus::step_underflow: return "step-underflow";
    case FlowStatus::degenerate_gradient: return "degenerate-gradient";
    case FlowStatus::step_limit: return "step-limit";
  }
  return "?";
}

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> x;
  /// |F(x(t), t) - F(x0, t0)|.
  double residual = 0.0;
  double d_sigma = 0.0;
  /// |v(x, t)| / d(x, Sigma), 0 on Sigma.
  double speed_ratio = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  FlowStatus status = FlowStatus::completed;
  std::string message;
  double max_residual = 0.0;

  const TrajectorySample& back() const { return samples.back(); }
  bool ok() const { return status == FlowStatus::completed; }
};

namespace detail {

inline std::vector<double> axpy(std::span<const double> x, double a, const std::vector<double>& k) {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * k[i];
  return y;
}

inline TrajectorySample make_sample(const FlowProblem& P, std::span<const double> x, double t,
                                    const std::vector<double>& F0, const std::vector<double>& v) {
  TrajectorySample s;
  s.t = t;
  s.x.assign(x.begin(), x.end());
  const auto F = P.value(x, t);
  double r2 = 0.0;
  for (std::size_t j = 0; j < F.size(); ++j) r2 += (F[j] - F0[j]) * (F[j] - F0[j]);
  s.residual = std::sqrt(r2);
  s.d_sigma = P.sigma().distance(x);
  s.speed_ratio = s.d_sigma > 0.0 ? linalg::norm(v) / s.d_sigma : 0.0;
  return s;
}

}  // namespace detail

/// RK4 integration of dx/dt = v(x, t) from t0 to t1.
inline Trajectory integrate(const FlowProblem& P, std::span<const double> x0, double t0, double t1,
                            const FlowOptions& opt = {}) {
  if (x0.size() != P.nvars()) throw std::invalid_argument("start point has the wrong dimension");
  if (t0 < 0 || t0 > 1 || t1 < 0 || t1 > 1) throw std::invalid_argument("times must lie in [0, 1]");
  if (!(opt.step_cap > 0)) throw std::invalid_argument("step cap must be positive");
  if (!(linalg::norm(x0) < P.radius())) throw std::invalid_argument("start point outside the region");

  Trajectory traj;
  const auto F0 = P.value(x0, t0);
  std::vector<double> x(x0.begin(), x0.end());
  double t = t0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;

  auto field = [&](std::span<const double> y, double s) { return kuo_field(P, y, s, opt); };
  auto record = [&](const std::vector<double>& v) {
    traj.samples.push_back(detail::make_sample(P, x, t, F0, v));
    traj.max_residual = std::max(traj.max_residual, traj.samples.back().residual);
  };

  try {
    std::vector<double> v = field(x, t);
    record(v);
    std::size_t steps = 0;
    while (dir * (t1 - t) > 0.0) {
      if (++steps > opt.max_steps) {
        traj.status = FlowStatus::step_limit;
        break;
      }
      const double d = P.sigma().distance(x);
      if (d > 0.0 && d < opt.sigma_floor) {
        traj.status = FlowStatus::reached_sigma_floor;
        break;
      }
      double dt = std::min(opt.step_cap, std::abs(t1 - t));
      const double speed = linalg::norm(v);
      if (speed > 0.0) dt = std::min(dt, opt.step_fraction * d / speed);
      if (dt < opt.min_step && std::abs(t1 - t) > opt.min_step) {
        traj.status = FlowStatus::step_underflow;
        traj.message = "step fell below " + std::to_string(opt.min_step);
        break;
      }
      const double h = dir * dt;
      // On Sigma the field vanishes identically, so x stays bitwise fixed.
      if (d > 0.0) {
        const auto k1 = v;
        const auto k2 = field(detail::axpy(x, h / 2, k1), t + h / 2);
        const auto k3 = field(detail::axpy(x, h / 2, k2), t + h / 2);
        const auto k4 = field(detail::axpy(x, h, k3), t + h);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      }
      t = std::abs(t1 - (t + h)) <= 1e-15 ? t1 : t + h;
      if (!(linalg::norm(x) < P.radius())) {
        v.assign(x.size(), 0.0);
        record(v);
        traj.status = FlowStatus::left_region;
        return traj;
      }
      v = field(x, t);
      record(v);
    }
  } catch (const DegenerateGradient& e) {
    traj.status = FlowStatus::degenerate_gradient;
    traj.message = e.what();
  }
  return traj;
}

/// Largest |v| / d(x, Sigma) seen along a trajectory.
inline double fitted_field_constant(const Trajectory& traj) {
  double c = 0.0;
  for (const auto& s : traj.samples) c = std::max(c, s.speed_ratio);
  return c;
}

/// d(x0) e^{-C|t - t0|} <= d(x(t)) <= d(x0) e^{C|t - t0|} at every sample.
inline bool envelope_respected(const Trajectory& traj, double C, double slack = 1e-9) {
  if (traj.samples.empty()) return true;
  const auto& s0 = traj.samples.front();
  for (const auto& s : traj.samples) {
    if (s0.d_sigma == 0.0 || s.d_sigma == 0.0) {
      if (s.d_sigma != s0.d_sigma) return false;
      continue;
    }
    const double drift = std::abs(std::log(s.d_sigma) - std::log(s0.d_sigma));
    if (drift > C * std::abs(s.t - s0.t) * (1 + slack) + slack) return false;
  }
  return true;
}

/**
 * Points with F(x) = level near 0: Gauss-Newton (minimum-norm) projection of
 * seeded random starts, keeping converged points with d(x, Sigma) > min_d.
 */
inline std::vector<std::vector<double>> find_level_seeds(const PolyMap& F, const SigmaSet& sigma,
                                                         const std::vector<double>& level, std::size_t count,
                                                         double radius, std::uint64_t seed, double min_d = 1e-4,
                                                         double tol = 1e-13) {
  if (level.size() != F.size()) throw std::invalid_argument("level has the wrong dimension");
  const CompiledMap cf(F);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<std::vector<double>> out;
  const std::size_t n = F.nvars(), p = F.size();
  for (std::size_t attempt = 0; attempt < 200 * count && out.size() < count; ++attempt) {
    std::vector<double> x(n);
    for (auto& xi : x) xi = u(rng);
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      auto r = cf.value(x);
      for (std::size_t j = 0; j < p; ++j) r[j] -= level[j];
      if (linalg::norm(r) <= tol) {
        ok = true;
        break;
      }
      const auto J = cf.jacobian(x);
      linalg::Mat JJt(p, linalg::Vec(p));
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) JJt[a][b] = linalg::dot(J[a], J[b]);
      linalg::Vec y;
      try {
        y = linalg::solve(JJt, r);
      } catch (const std::domain_error&) {
        break;
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) x[i] -= J[j][i] * y[j];
    }
    if (ok && sigma.distance(x) > min_d && linalg::norm(x) < radius) out.push_back(std::move(x));
  }
  return out;
}

struct LevelMap {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<double>> endpoints;
  /// |g(y_i) - f(seed_i)| per seed, NaN when the trajectory failed.
  std::vector<double> residuals;
  double max_residual = 0.0;
  std::size_t failures = 0;
};

/// Carries seeds on level sets of f to the matching level sets of g.
inline LevelMap map_level_set(const FlowProblem& P, const std::vector<std::vector<double>>& seeds, double t0 = 0.0,
                              double t1 = 1.0, const FlowOptions& opt = {}) {
  LevelMap out;
  for (const auto& s : seeds) {
    Trajectory tr = integrate(P, s, t0, t1, opt);
    if (tr.ok()) {
      const auto a = P.value(s, t0);
      const auto b = P.value(tr.back().x, t1);
      double r2 = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) r2 += (a[j] - b[j]) * (a[j] - b[j]);
      out.residuals.push_back(std::sqrt(r2));
      out.max_residual = std::max(out.max_residual, out.residuals.back());
    } else {
      out.residuals.push_back(std::numeric_limits<double>::quiet_NaN());
      ++out.failures;
    }
    out.endpoints.push_back(tr.back().x);
    out.trajectories.push_back(std::move(tr));
  }
  return out;
}

struct Roundtrip {
  double deviation = std::numeric_limits<double>::quiet_NaN();
  Trajectory forward, backward;
  bool ok() const { return forward.ok() && backward.ok(); }
};

/// Integrates 0 -> 1 then 1 -> 0 and measures |x_back - x0|.
inline Roundtrip roundtrip_check(const FlowProblem& P, std::span<const double> x0, const FlowOptions& opt = {}) {
  Roundtrip rt;
  rt.forward = integrate(P, x0, 0.0, 1.0, opt);
  if (!rt.forward.ok()) return rt;
  rt.backward = integrate(P, rt.forward.back().x, 1.0, 0.0, opt);
  if (!rt.backward.ok()) return rt;
  std::vector<double> diff(x0.begin(), x0.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rt.backward.back().x[i];
  rt.deviation = linalg::norm(diff);
  return rt;
}

struct FieldBoundRow {
  double eps = 0.0;
  double max_ratio = 0.0;  // max |v| / d over horn samples
  std::size_t samples = 0;
};

/**
 * Largest |v(x, t)| / d(x, Sigma) over shell samples inside the horn
 * |F(x, t)| <= width d^r, with t drawn uniformly in [0, 1].
 */
inline std::vector<FieldBoundRow> field_bound_scan(const FlowProblem& P, const std::vector<double>& shells,
                                                   std::size_t samples_per_shell, double width, std::uint64_t seed,
                                                   const FlowOptions& opt = {}) {
  std::vector<FieldBoundRow> rows;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    FieldBoundRow row;
    row.eps = shells[k];
    const auto pts = sample_shell(P.sigma(), shells[k], samples_per_shell, std::min(0.5, P.radius() / 2),
                                  derive_seed(seed, k), ShellOptions{true, 0.5, 40});
    Rng rng(derive_seed(seed, 1000 + k));
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (const auto& x : pts) {
      const double t = ut(rng);
      const double d = P.sigma().distance(x);
      if (linalg::norm(P.value(x, t)) > width * std::pow(d, static_cast<int>(P.r()))) continue;
      try {
        const auto v = kuo_field(P, x, t, opt);
        row.max_ratio = std::max(row.max_ratio, linalg::norm(v) / d);
      } catch (const DegenerateGradient&) {
        row.max_ratio = std::numeric_limits<double>::infinity();
      }
      ++row.samples;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace jetlab
