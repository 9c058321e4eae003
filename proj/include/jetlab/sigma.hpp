#pragma once

/**
 * @file sigma.hpp
 * @brief The relative set Sigma as a finite union of coordinate subspaces.
 *
 * A piece is described by its forced index set {i : x_i = 0}; forcing every
 * coordinate gives the origin. Distances are exact: the distance to a piece
 * is the Euclidean norm of the forced coordinates, and the distance to
 * Sigma is the minimum over pieces.
 */

#include <jetlab/arc.hpp>
#include <jetlab/order.hpp>
#include <jetlab/polynomial.hpp>
#include <jetlab/random.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetlab {

class SigmaSet {
 public:
  using Piece = std::vector<std::size_t>;  // sorted 0-based forced indices

  SigmaSet() = default;

  SigmaSet(std::size_t nvars, std::vector<Piece> pieces) : nvars_(nvars) {
    if (pieces.empty()) throw std::invalid_argument("sigma needs at least one piece");
    for (auto& p : pieces) {
      if (p.empty()) throw std::invalid_argument("a sigma piece must force at least one coordinate");
      std::sort(p.begin(), p.end());
      p.erase(std::unique(p.begin(), p.end()), p.end());
      for (auto i : p)
        if (i >= nvars) throw std::invalid_argument("forced index out of range");
    }
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    // A piece whose forced set contains another's is a subset of it.
    for (const auto& p : pieces) {
      bool redundant = false;
      for (const auto& q : pieces)
        if (&p != &q && q.size() < p.size() && std::includes(p.begin(), p.end(), q.begin(), q.end()))
          redundant = true;
      if (!redundant) pieces_.push_back(p);
    }
  }

  static SigmaSet origin(std::size_t nvars) {
    Piece all(nvars);
    for (std::size_t i = 0; i < nvars; ++i) all[i] = i;
    return SigmaSet(nvars, {all});
  }

  static SigmaSet coordinate(std::size_t nvars, Piece forced) { return SigmaSet(nvars, {std::move(forced)}); }

  std::size_t nvars() const { return nvars_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  double piece_distance(std::size_t k, std::span<const double> x) const {
    double s = 0.0;
    for (auto i : pieces_[k]) s += x[i] * x[i];
    return std::sqrt(s);
  }

  double distance(std::span<const double> x) const {
    if (x.size() != nvars_) throw std::invalid_argument("point dimension does not match sigma");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pieces_.size(); ++k) best = std::min(best, piece_distance(k, x));
    return best;
  }

  /// Exact squared distance for rational points.
  Rational distance_squared(std::span<const Rational> x) const {
    if (x.size() != nvars_) throw std::invalid_argument("point dimension does not match sigma");
    Rational best = -1;
    for (const auto& p : pieces_) {
      Rational s = 0;
      for (auto i : p) s += x[i] * x[i];
      if (best < 0 || s < best) best = s;
    }
    return best;
  }

  bool contains(std::span<const double> x) const { return distance(x) == 0.0; }

  friend bool operator==(const SigmaSet&, const SigmaSet&) = default;

 private:
  std::size_t nvars_ = 0;
  std::vector<Piece> pieces_;
};

/// Order of d(lambda(t), Sigma). The distance is a min over pieces, so its order is the max of the piece orders.
inline Order distance_order_along_arc(const Arc& arc, const SigmaSet& sigma) {
  if (arc.nvars() != sigma.nvars()) throw std::invalid_argument("arc and sigma have different nvars");
  Order best = Order::infinity();
  for (const auto& piece : sigma.pieces()) {
    // Inside the piece iff all forced components vanish; then the distance is 0.
    Order piece_order = Order::infinity();
    for (auto i : piece) piece_order = min(piece_order, arc.component_order(i));
    if (piece_order.is_infinite()) return Order::infinity();
    if (best.is_infinite() || piece_order.value() > best.value()) best = piece_order;
  }
  return best;
}

struct HornSpec {
  PolyMap map;
  unsigned degree = 1;
  Rational width = 1;
  Rational radius = 1;
};

/// ||F(x)|| <= width * d(x, Sigma)^degree, decided exactly on squares.
inline bool horn_contains(std::span<const Rational> x, const HornSpec& horn, const SigmaSet& sigma) {
  if (horn.width <= 0 || horn.radius <= 0) throw std::invalid_argument("horn width and radius must be positive");
  Rational norm2 = 0;
  for (const auto& f : horn.map.components()) {
    Rational v = f.eval(x);
    norm2 += v * v;
  }
  const Rational rhs = horn.width * horn.width * pow(sigma.distance_squared(x), horn.degree);
  return norm2 <= rhs;
}

inline bool horn_contains(std::span<const double> x, const CompiledMap& map, unsigned degree, double width,
                          const SigmaSet& sigma) {
  double norm2 = 0.0;
  for (double v : map.value(x)) norm2 += v * v;
  return std::sqrt(norm2) <= width * std::pow(sigma.distance(x), static_cast<int>(degree));
}

inline bool horn_contains(std::span<const double> x, const HornSpec& horn, const SigmaSet& sigma) {
  return horn_contains(x, CompiledMap(horn.map), horn.degree, horn.width.get_d(), sigma);
}

struct ShellOptions {
  /// Axis and diagonal points of each piece (2d + 2 per piece).
  bool include_grid = true;
  /// Fraction of random draws taken on a logarithmic scale, which reaches
  /// thin cusp regions that uniform draws essentially never hit.
  double log_scale_fraction = 0.0;
  int log_scale_bits = 40;
};

/**
 * Points x with d(x, Sigma) = eps: pick a piece, put the forced coordinates
 * on the sphere of radius eps, draw the free ones in [-box_radius, box_radius],
 * and reject points closer than eps to another piece. Deterministic in `seed`.
 */
inline std::vector<std::vector<double>> sample_shell(const SigmaSet& sigma, double eps, std::size_t count,
                                                     double box_radius, std::uint64_t seed,
                                                     const ShellOptions& opts = {}) {
  if (!(eps > 0.0)) throw std::domain_error("shell radius must be positive");
  if (!(eps < box_radius)) throw std::domain_error("infeasible shell: eps must be smaller than the box radius");
  const std::size_t n = sigma.nvars();
  const auto& pieces = sigma.pieces();
  std::vector<std::vector<double>> out;
  out.reserve(count);

  auto on_shell = [&](const std::vector<double>& x) {
    return std::abs(sigma.distance(x) - eps) <= 1e-12 * eps;
  };

  if (opts.include_grid) {
    for (const auto& piece : pieces) {
      const double d = static_cast<double>(piece.size());
      for (auto i : piece) {
        for (double s : {1.0, -1.0}) {
          std::vector<double> x(n, 0.0);
          x[i] = s * eps;
          if (out.size() < count && on_shell(x)) out.push_back(std::move(x));
        }
      }
      for (double s : {1.0, -1.0}) {
        std::vector<double> x(n, 0.0);
        for (auto i : piece) x[i] = s * eps / std::sqrt(d);
        if (out.size() < count && on_shell(x)) out.push_back(std::move(x));
      }
    }
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<bool> forced(n);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * (count + 1);
  while (out.size() < count) {
    if (++attempts > max_attempts) throw std::domain_error("infeasible shell: rejection sampling exhausted");
    const auto& piece = pieces[std::min(pieces.size() - 1, static_cast<std::size_t>(unit(rng) * pieces.size()))];
    const bool log_scale = unit(rng) < opts.log_scale_fraction;
    std::fill(forced.begin(), forced.end(), false);
    for (auto i : piece) forced[i] = true;

    std::vector<double> x(n, 0.0);
    double norm = 0.0;
    if (log_scale && piece.size() > 1) {
      const std::size_t lead = piece[std::min(piece.size() - 1, static_cast<std::size_t>(unit(rng) * piece.size()))];
      for (auto i : piece) {
        const double mag = i == lead ? 1.0 : std::exp2(-unit(rng) * opts.log_scale_bits);
        x[i] = (unit(rng) < 0.5 ? -1.0 : 1.0) * mag;
      }
    } else {
      for (auto i : piece) x[i] = gauss(rng);
    }
    for (auto i : piece) norm += x[i] * x[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (auto i : piece) x[i] *= eps / norm;
    for (std::size_t i = 0; i < n; ++i) {
      if (forced[i]) continue;
      if (log_scale) {
        x[i] = (unit(rng) < 0.5 ? -1.0 : 1.0) * box_radius * std::exp2(-unit(rng) * opts.log_scale_bits);
      } else {
        x[i] = box_radius * (2.0 * unit(rng) - 1.0);
      }
    }
    if (on_shell(x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace jetlab
