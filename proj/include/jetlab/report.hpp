#pragma once

// JSON and CSV forms of verdicts, fits, measures and trajectories.

#include <jetlab/conditions.hpp>
#include <jetlab/flow.hpp>
#include <jetlab/io.hpp>
#include <jetlab/measures.hpp>
#include <jetlab/verdict.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

namespace jetlab {

namespace detail {

/// JSON has no NaN or infinity; they are written as null.
inline Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json reals(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

inline Json order_json(const Order& o) {
  if (o.is_finite()) return o.value();
  return o.is_infinite() ? Json("inf") : Json("unknown");
}

inline Json rational_json(const Rational& q) {
  Json j = Json::object();
  rational_to_json_fields(q, j);
  j["value"] = q.get_d();
  return j;
}

}  // namespace detail

inline Json to_json(const ArcProfile& p) {
  return Json{{"ord_d", detail::order_json(p.ord_d)},
              {"ord_f", detail::order_json(p.ord_f)},
              {"ord_kappa", detail::order_json(p.ord_kappa)},
              {"inside_sigma", p.inside_sigma},
              {"truncation", p.truncation}};
}

inline Json to_json(const Witness& w) {
  Json j = Json::object();
  if (w.arc) j["arc"] = to_json(*w.arc);
  if (w.profile) j["profile"] = to_json(*w.profile);
  if (w.point) j["point"] = detail::reals(*w.point);
  if (w.value) j["value"] = detail::real(*w.value);
  if (!w.note.empty()) j["note"] = w.note;
  return j;
}

inline Json to_json(const ShellRow& r) {
  return Json{{"eps", r.eps},
              {"min", detail::real(r.min_value)},
              {"argmin", detail::reals(r.argmin)},
              {"samples", r.samples},
              {"used_in_fit", r.used_in_fit}};
}

inline Json to_json(const Verdict& v) {
  Json j{{"condition", v.condition},
         {"mode", to_string(v.mode)},
         {"status", to_string(v.status)},
         {"seed", v.seed}};
  if (v.witness) j["witness"] = to_json(*v.witness);
  if (v.exponent)
    j["exponent"] = Json{{"alpha_hat", detail::real(v.exponent->alpha_hat)},
                         {"C_hat", detail::real(v.exponent->C_hat)},
                         {"r2", detail::real(v.exponent->r2)}};
  if (v.target_exponent) j["target_exponent"] = detail::real(*v.target_exponent);
  if (v.delta_estimate) j["delta_hat"] = detail::real(*v.delta_estimate);
  if (v.arc_delta_bound) j["arc_delta_bound"] = detail::rational_json(*v.arc_delta_bound);
  if (v.extremal_slack) j["extremal_slack"] = detail::rational_json(*v.extremal_slack);
  if (v.mode != Mode::sampling) j["arcs_checked"] = v.arcs_checked;
  if (!v.diagnostics.empty()) {
    Json rows = Json::array();
    for (const auto& r : v.diagnostics) rows.push_back(to_json(r));
    j["shells"] = std::move(rows);
  }
  if (!v.notes.empty()) j["notes"] = v.notes;
  if (!v.parts.empty()) {
    Json parts = Json::array();
    for (const auto& p : v.parts) parts.push_back(to_json(p));
    j["parts"] = std::move(parts);
  }
  return j;
}

inline Json to_json(const LojaFit& fit) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < fit.shells.size(); ++k)
    rows.push_back(Json{{"eps", fit.shells[k]},
                        {"min", detail::real(fit.minima[k])},
                        {"argmin", detail::reals(fit.argmins[k])},
                        {"samples", fit.samples[k]},
                        {"used_in_fit", static_cast<bool>(fit.used[k])}});
  Json j{{"alpha_hat", detail::real(fit.alpha_hat)},
         {"C_hat", detail::real(fit.C_hat)},
         {"r2", detail::real(fit.r2)},
         {"conclusive", fit.conclusive},
         {"shells", std::move(rows)}};
  if (!fit.note.empty()) j["note"] = fit.note;
  return j;
}

inline Json to_json(const RatioScan& s) {
  Json rows = Json::array();
  for (const auto& r : s.shells)
    rows.push_back(Json{{"shell", r.eps},
                        {"min_ratio", detail::real(r.min_ratio)},
                        {"max_ratio", detail::real(r.max_ratio)},
                        {"argmin", detail::reals(r.argmin)},
                        {"argmax", detail::reals(r.argmax)},
                        {"used", r.used},
                        {"skipped", r.skipped}});
  return Json{{"conclusive", s.conclusive},
              {"min_ratio", detail::real(s.min_ratio)},
              {"max_ratio", detail::real(s.max_ratio)},
              {"seed", s.seed},
              {"shells", std::move(rows)}};
}

inline Json to_json(const Trajectory& tr) {
  Json samples = Json::array();
  for (const auto& s : tr.samples)
    samples.push_back(Json{{"t", s.t},
                           {"x", detail::reals(s.x)},
                           {"F_residual", detail::real(s.residual)},
                           {"d_sigma", detail::real(s.d_sigma)}});
  Json j{{"status", to_string(tr.status)}, {"max_residual", detail::real(tr.max_residual)}, {"samples", std::move(samples)}};
  if (!tr.message.empty()) j["message"] = tr.message;
  return j;
}

/// `log_eps,log_min` rows for shells with a positive minimum.
inline std::string plot_csv(const std::vector<ShellRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17) << "log_eps,log_min,used_in_fit\n";
  for (const auto& r : rows)
    if (r.min_value > 0.0 && std::isfinite(r.min_value))
      out << std::log(r.eps) << ',' << std::log(r.min_value) << ',' << (r.used_in_fit ? 1 : 0) << '\n';
  return out.str();
}

inline std::string plot_csv(const LojaFit& fit) {
  std::vector<ShellRow> rows;
  for (std::size_t k = 0; k < fit.shells.size(); ++k)
    rows.push_back(ShellRow{fit.shells[k], fit.minima[k], fit.argmins[k], fit.samples[k], fit.used[k]});
  return plot_csv(rows);
}

}  // namespace jetlab
