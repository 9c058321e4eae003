#pragma once

// Flatness of a polynomial map along Sigma: j^r h vanishes on every piece.

#include <jetlab/polynomial.hpp>
#include <jetlab/sigma.hpp>

namespace jetlab {

/// Degree of a monomial in the forced variables of a piece.
inline unsigned forced_degree(const Exponent& e, const SigmaSet::Piece& piece) {
  unsigned d = 0;
  for (auto i : piece) d += e[i];
  return d;
}

/**
 * True iff every partial derivative of order <= r of every component of h
 * vanishes identically on every piece of Sigma. On a coordinate subspace
 * this is the monomial criterion: each term has degree >= r + 1 in the
 * forced variables.
 */
inline bool jet_vanishes_on_sigma(const PolyMap& h, const SigmaSet& sigma, unsigned r) {
  if (h.nvars() != sigma.nvars()) throw std::invalid_argument("map and sigma have different nvars");
  for (const auto& comp : h.components())
    for (const auto& [e, c] : comp.terms())
      for (const auto& piece : sigma.pieces())
        if (forced_degree(e, piece) < r + 1) return false;
  return true;
}

inline bool jet_vanishes_on_sigma(const Polynomial& h, const SigmaSet& sigma, unsigned r) {
  return jet_vanishes_on_sigma(PolyMap({h}), sigma, r);
}

}  // namespace jetlab
