#pragma once

// Outcome records shared by the arc engine and the sampling checkers.

#include <jetlab/arc.hpp>
#include <jetlab/order.hpp>
#include <jetlab/rational.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetlab {

enum class Condition {
  kk,            // kappa(df) >~ d^{r-1}
  ktilde,        // d kappa(df) + |f| >~ d^r
  kk_delta,      // kappa(df) >~ d^{r-delta}
  ktilde_delta,  // d kappa(df) + |f| >~ d^{r+1-delta}
  kz,            // (d |df^* y| + |f|) / d^{r+1} -> infinity
};

inline std::string to_string(Condition c) {
  switch (c) {
    case Condition::kk: return "kk";
    case Condition::ktilde: return "ktilde";
    case Condition::kk_delta: return "kk-delta";
    case Condition::ktilde_delta: return "ktilde-delta";
    case Condition::kz: return "kz";
  }
  return "?";
}

inline Condition condition_from_string(const std::string& s) {
  if (s == "kk") return Condition::kk;
  if (s == "ktilde") return Condition::ktilde;
  if (s == "kk-delta") return Condition::kk_delta;
  if (s == "ktilde-delta") return Condition::ktilde_delta;
  if (s == "kz") return Condition::kz;
  throw std::invalid_argument("unknown arc condition '" + s + "'");
}

/// Orders along one arc: of d(lambda, Sigma), |F o lambda| and kappa(dF o lambda).
struct ArcProfile {
  Order ord_d = Order::unknown();
  Order ord_f = Order::unknown();
  Order ord_kappa = Order::unknown();
  bool inside_sigma = false;
  std::uint32_t truncation = 0;

  /// min(ord_d + ord_kappa, ord_f): the order of d * kappa + |f|.
  Order ord_ktilde_lhs() const { return min(ord_d + ord_kappa, ord_f); }

  friend bool operator==(const ArcProfile&, const ArcProfile&) = default;
};

enum class Status { holds_on_evidence, fails_with_witness, inconclusive };
enum class Mode { arc, sampling, combined };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::holds_on_evidence: return "holds-on-evidence";
    case Status::fails_with_witness: return "fails-with-witness";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::arc: return "arc";
    case Mode::sampling: return "sampling";
    case Mode::combined: return "combined";
  }
  return "?";
}

struct Witness {
  std::optional<Arc> arc;
  std::optional<ArcProfile> profile;
  std::optional<std::vector<double>> point;
  /// Value of the tested ratio or target at `point`.
  std::optional<double> value;
  std::string note;
};

/// Fit of log(min target) ~ alpha * log(eps) + log(C).
struct ExponentEstimate {
  double alpha_hat = 0.0;
  double C_hat = 0.0;
  double r2 = 0.0;
};

struct ShellRow {
  double eps = 0.0;
  double min_value = 0.0;
  std::vector<double> argmin;
  std::size_t samples = 0;
  bool used_in_fit = false;
};

struct Verdict {
  std::string condition;
  Mode mode = Mode::arc;
  Status status = Status::inconclusive;
  std::optional<Witness> witness;
  std::optional<ExponentEstimate> exponent;
  /// Exponent the condition compares against (r-1, r, r+1, a, ...).
  std::optional<double> target_exponent;
  std::optional<double> delta_estimate;
  /// Smallest arc-level upper bound on delta over the scanned arcs.
  std::optional<Rational> arc_delta_bound;
  /// Smallest slack (in units of ord_d) over the scanned arcs.
  std::optional<Rational> extremal_slack;
  std::vector<ShellRow> diagnostics;
  std::vector<Verdict> parts;
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  std::size_t arcs_checked = 0;
};

}  // namespace jetlab
