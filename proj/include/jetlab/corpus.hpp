#pragma once

/**
 * @file corpus.hpp
 * @brief Example corpus: schema, loading, and a runner that compares every
 * declared check against its expectation.
 *
 * Entry layout (JSON):
 *
 *     {"id": "fm3-line", "map": ["x^3 - 3*x*y^3"], "nvars": 2, "sigma": "{x1=0}",
 *      "checks": [{"kind": "kk", "r": 3,
 *                  "expect": {"status": "fails-with-witness"},
 *                  "provenance": "published"}]}
 *
 * Check kinds: kk, kk-delta, ktilde, ktilde-delta, kuo, thom, elliptic,
 * loja, ratio, flow. Expectations may pin `status`, `alpha` and `delta`
 * as {"value", "tol"}, an exact `arc_delta_bound`, ratio bounds, or flow
 * residual bounds. `overrides` adjusts shells, scan depth and sample counts.
 */

#include <jetlab/conditions.hpp>
#include <jetlab/flow.hpp>
#include <jetlab/io.hpp>
#include <jetlab/measures.hpp>
#include <jetlab/report.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetlab {

/// Malformed corpus file or entry.
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerance {
  double value = 0.0;
  double tol = 0.0;
  bool contains(double x) const { return std::abs(x - value) <= tol; }
};

struct CorpusCheck {
  std::string kind;
  unsigned r = 0;
  Json params;  // kind-specific fields, kept verbatim
  std::optional<Status> expect_status;
  std::optional<Tolerance> expect_alpha;
  std::optional<Tolerance> expect_delta;
  std::optional<Rational> expect_arc_delta_bound;
  Json expect;  // verbatim expectation block
  std::string provenance;
};

struct CorpusEntry {
  std::string id;
  std::string description;
  PolyMap map;
  SigmaSet sigma;
  std::vector<CorpusCheck> checks;
  std::string note;
};

struct CheckOutcome {
  std::string entry;
  std::string kind;
  bool passed = false;
  bool inconclusive = false;
  std::string message;
  Json report;
  double seconds = 0.0;
};

struct CorpusRun {
  std::vector<CheckOutcome> outcomes;

  /// 0 all expectations met, 1 a mismatch, 2 an unexpected inconclusive result.
  int exit_code() const {
    bool inconclusive = false;
    for (const auto& o : outcomes) {
      if (!o.passed && !o.inconclusive) return 1;
      inconclusive = inconclusive || (!o.passed && o.inconclusive);
    }
    return inconclusive ? 2 : 0;
  }
};

namespace detail {

inline Status status_from_string(const std::string& s) {
  if (s == "holds-on-evidence") return Status::holds_on_evidence;
  if (s == "fails-with-witness") return Status::fails_with_witness;
  if (s == "inconclusive") return Status::inconclusive;
  throw CorpusError("unknown status '" + s + "'");
}

inline Tolerance tolerance_from_json(const Json& j) {
  return Tolerance{j.at("value").get<double>(), j.at("tol").get<double>()};
}

inline Rational rational_from_text(const std::string& s) {
  Rational q;
  if (q.set_str(s, 10) != 0) throw CorpusError("bad rational '" + s + "'");
  q.canonicalize();
  return q;
}

inline CorpusCheck check_from_json(const Json& j) {
  CorpusCheck c;
  c.kind = j.at("kind").get<std::string>();
  static const std::vector<std::string> kinds{"kk",   "kk-delta", "ktilde", "ktilde-delta", "kuo",
                                              "thom", "elliptic", "loja",   "ratio",        "flow"};
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) throw CorpusError("unknown check kind '" + c.kind + "'");
  c.r = j.value("r", 0u);
  static const std::vector<std::string> need_r{"kk", "kk-delta", "ktilde", "ktilde-delta", "kuo", "flow"};
  if (c.r == 0 && std::find(need_r.begin(), need_r.end(), c.kind) != need_r.end())
    throw CorpusError("check '" + c.kind + "' needs a positive r");
  if (c.kind == "thom" && !j.contains("a")) throw CorpusError("thom check needs an exponent a");
  if (c.kind == "flow" && !j.contains("g")) throw CorpusError("flow check needs a perturbed map g");
  c.params = j;
  c.provenance = j.value("provenance", "");
  if (j.contains("expect")) {
    c.expect = j.at("expect");
    if (c.expect.contains("status")) c.expect_status = status_from_string(c.expect.at("status").get<std::string>());
    if (c.expect.contains("alpha")) c.expect_alpha = tolerance_from_json(c.expect.at("alpha"));
    if (c.expect.contains("delta")) c.expect_delta = tolerance_from_json(c.expect.at("delta"));
    if (c.expect.contains("arc_delta_bound"))
      c.expect_arc_delta_bound = rational_from_text(c.expect.at("arc_delta_bound").get<std::string>());
  }
  return c;
}

}  // namespace detail

inline CorpusEntry entry_from_json(const Json& j) {
  try {
    CorpusEntry e;
    e.id = j.at("id").get<std::string>();
    e.description = j.value("description", "");
    e.note = j.value("note", "");
    const std::size_t n = j.at("nvars").get<std::size_t>();
    const auto& m = j.at("map");
    if (m.is_array() && !m.empty() && m.front().is_string()) {
      e.map = parse_map(m.get<std::vector<std::string>>(), n);
    } else {
      e.map = map_from_json(m);
    }
    if (e.map.nvars() != n) throw CorpusError("entry " + e.id + ": map nvars differs from declared nvars");
    e.sigma = j.at("sigma").is_string() ? parse_sigma(j.at("sigma").get<std::string>(), n) : sigma_from_json(j.at("sigma"));
    for (const auto& c : j.at("checks")) e.checks.push_back(detail::check_from_json(c));
    return e;
  } catch (const CorpusError&) {
    throw;
  } catch (const std::exception& ex) {
    throw CorpusError(std::string("corpus entry: ") + ex.what());
  }
}

inline std::vector<CorpusEntry> load_corpus(const Json& j) {
  if (!j.contains("entries") || !j.at("entries").is_array()) throw CorpusError("corpus needs an 'entries' array");
  std::vector<CorpusEntry> out;
  for (const auto& e : j.at("entries")) out.push_back(entry_from_json(e));
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (out[a].id == out[b].id) throw CorpusError("duplicate corpus id '" + out[a].id + "'");
  return out;
}

inline std::vector<CorpusEntry> load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw CorpusError(std::string("corpus is not valid JSON: ") + e.what());
  }
  return load_corpus(j);
}

namespace detail {

inline CheckConfig config_for(const CorpusCheck& c, std::uint64_t seed) {
  CheckConfig cfg;
  cfg.loja.seed = seed;
  cfg.scan.seed = seed;
  const Json ov = c.params.value("overrides", Json::object());
  if (ov.contains("shells")) {
    const auto ks = ov.at("shells").get<std::vector<int>>();
    if (ks.size() != 2 || ks[0] >= ks[1]) throw CorpusError("overrides.shells must be [first, last]");
    cfg.loja.shells = shell_ladder(ks[0], ks[1]);
  }
  if (ov.contains("samples")) cfg.loja.samples_per_shell = ov.at("samples").get<std::size_t>();
  if (ov.contains("max_exponent")) cfg.scan.max_exponent = ov.at("max_exponent").get<std::uint32_t>();
  if (ov.contains("terms")) cfg.scan.terms = ov.at("terms").get<unsigned>();
  if (ov.contains("exponent_tol")) cfg.exponent_tol = ov.at("exponent_tol").get<double>();
  if (ov.contains("arcs")) cfg.run_arcs = ov.at("arcs").get<bool>();
  return cfg;
}

inline void compare_verdict(const CorpusCheck& c, const Verdict& v, CheckOutcome& out) {
  std::vector<std::string> problems;
  bool inconclusive = false;
  if (c.expect_status && v.status != *c.expect_status) {
    problems.push_back("status " + to_string(v.status) + ", expected " + to_string(*c.expect_status));
    inconclusive = v.status == Status::inconclusive;
  }
  if (c.expect_alpha) {
    if (!v.exponent || !c.expect_alpha->contains(v.exponent->alpha_hat))
      problems.push_back("alpha_hat " + (v.exponent ? std::to_string(v.exponent->alpha_hat) : std::string("missing")) +
                         ", expected " + std::to_string(c.expect_alpha->value) + " +- " +
                         std::to_string(c.expect_alpha->tol));
  }
  if (c.expect_delta) {
    if (!v.delta_estimate || !c.expect_delta->contains(*v.delta_estimate))
      problems.push_back("delta_hat " + (v.delta_estimate ? std::to_string(*v.delta_estimate) : std::string("missing")) +
                         ", expected " + std::to_string(c.expect_delta->value) + " +- " +
                         std::to_string(c.expect_delta->tol));
  }
  if (c.expect_arc_delta_bound) {
    if (!v.arc_delta_bound || *v.arc_delta_bound != *c.expect_arc_delta_bound)
      problems.push_back("arc delta bound " + (v.arc_delta_bound ? v.arc_delta_bound->get_str() : std::string("missing")) +
                         ", expected " + c.expect_arc_delta_bound->get_str());
  }
  out.passed = problems.empty();
  out.inconclusive = !out.passed && inconclusive && problems.size() == 1;
  std::ostringstream msg;
  msg << to_string(v.status);
  if (v.exponent) msg << ", alpha_hat " << std::setprecision(4) << v.exponent->alpha_hat;
  if (v.delta_estimate) msg << ", delta_hat " << std::setprecision(4) << *v.delta_estimate;
  if (v.arc_delta_bound) msg << ", arc delta bound " << v.arc_delta_bound->get_str();
  for (const auto& p : problems) msg << "; " << p;
  out.message = msg.str();
  out.report = to_json(v);
}

inline std::vector<Polynomial> generators_for(const CorpusEntry& e, const CorpusCheck& c) {
  const std::string which = c.params.value("generators", "map");
  if (which == "map") return e.map.components();
  if (which == "kuo-ideal") return kuo_ideal_generators(e.map);
  std::vector<Polynomial> gens;
  for (const auto& s : c.params.at("generators")) gens.push_back(parse_polynomial(s.get<std::string>(), e.map.nvars()));
  return gens;
}

inline void run_loja(const CorpusEntry& e, const CorpusCheck& c, const CheckConfig& cfg, CheckOutcome& out) {
  const std::string target = c.params.value("target", "kappa");
  const LojaFit fit = loja_exponent(condition_target(target == "kappa" ? "kk" : target, e.map, e.sigma), e.sigma, cfg.loja);
  out.report = to_json(fit);
  out.passed = fit.conclusive && (!c.expect_alpha || c.expect_alpha->contains(fit.alpha_hat));
  out.inconclusive = !fit.conclusive;
  std::ostringstream msg;
  msg << "alpha_hat " << std::setprecision(4) << fit.alpha_hat << ", r2 " << fit.r2;
  if (c.expect_alpha && !out.passed) msg << "; expected " << c.expect_alpha->value << " +- " << c.expect_alpha->tol;
  out.message = msg.str();
}

inline void run_ratio(const CorpusEntry& e, const CorpusCheck& c, std::uint64_t seed, CheckOutcome& out) {
  const unsigned m = c.params.value("m", 2u);
  const auto ks = c.params.value("shells", std::vector<int>{3, 10});
  const std::size_t samples = c.params.value("samples", std::size_t{2000});
  const RatioScan s = km_tm_ratio_scan(e.map, m, e.sigma, shell_ladder(ks.at(0), ks.at(1)), samples, seed);
  out.report = to_json(s);
  const double lo = c.expect.value("min_ratio", 0.0);
  const double hi = c.expect.value("max_ratio", std::numeric_limits<double>::infinity());
  out.passed = s.conclusive && s.min_ratio >= lo && s.max_ratio <= hi;
  out.inconclusive = !s.conclusive;
  std::ostringstream msg;
  msg << "K/T in [" << std::setprecision(4) << s.min_ratio << ", " << s.max_ratio << "]";
  if (!out.passed) msg << "; expected within [" << lo << ", " << hi << "]";
  out.message = msg.str();
}

inline void run_flow(const CorpusEntry& e, const CorpusCheck& c, std::uint64_t seed, CheckOutcome& out) {
  const PolyMap g = parse_map(c.params.at("g").get<std::vector<std::string>>(), e.map.nvars());
  const FlowProblem P(e.map, g, e.sigma, c.r, c.params.value("radius", 1.0));
  FlowOptions opt;
  opt.step_cap = c.params.value("step_cap", opt.step_cap);
  const std::size_t count = c.params.value("seeds", std::size_t{8});
  const auto seeds = find_level_seeds(e.map, e.sigma, std::vector<double>(e.map.size(), 0.0), count,
                                      std::min(0.5, P.radius() / 2), seed);
  double max_residual = 0.0, max_roundtrip = 0.0;
  bool envelope = true;
  std::size_t failures = 0;
  Json trajectories = Json::array();
  for (const auto& x0 : seeds) {
    const Roundtrip rt = roundtrip_check(P, x0, opt);
    if (!rt.ok()) {
      ++failures;
      continue;
    }
    max_residual = std::max({max_residual, rt.forward.max_residual, rt.backward.max_residual});
    max_roundtrip = std::max(max_roundtrip, rt.deviation);
    envelope = envelope && envelope_respected(rt.forward, fitted_field_constant(rt.forward)) &&
               envelope_respected(rt.backward, fitted_field_constant(rt.backward));
    trajectories.push_back(Json{{"seed_point", detail::reals(x0)},
                                {"endpoint", detail::reals(rt.forward.back().x)},
                                {"max_residual", rt.forward.max_residual},
                                {"roundtrip", rt.deviation},
                                {"field_constant", fitted_field_constant(rt.forward)}});
  }
  const double res_bound = c.expect.value("max_residual", 1e-6);
  const double rt_bound = c.expect.value("max_roundtrip", 1e-6);
  out.passed = failures == 0 && !seeds.empty() && max_residual <= res_bound && max_roundtrip <= rt_bound && envelope;
  out.report = Json{{"seeds", seeds.size()},
                    {"failures", failures},
                    {"max_residual", max_residual},
                    {"max_roundtrip", max_roundtrip},
                    {"envelope_respected", envelope},
                    {"step_cap", opt.step_cap},
                    {"trajectories", std::move(trajectories)}};
  std::ostringstream msg;
  msg << seeds.size() << " seeds, residual " << std::setprecision(3) << max_residual << ", roundtrip " << max_roundtrip
      << (envelope ? ", envelope ok" : ", envelope broken");
  if (failures) msg << ", " << failures << " failed trajectories";
  out.message = msg.str();
}

}  // namespace detail

/// Runs one declared check of an entry.
inline CheckOutcome run_check(const CorpusEntry& e, const CorpusCheck& c, std::uint64_t seed) {
  CheckOutcome out;
  out.entry = e.id;
  out.kind = c.kind;
  const auto start = std::chrono::steady_clock::now();
  const CheckConfig cfg = detail::config_for(c, seed);
  if (c.kind == "kk") {
    detail::compare_verdict(c, check_kuiper_kuo(e.map, e.sigma, c.r, cfg), out);
  } else if (c.kind == "kk-delta") {
    detail::compare_verdict(c, check_second_kuiper_kuo(e.map, e.sigma, c.r, cfg), out);
  } else if (c.kind == "ktilde") {
    detail::compare_verdict(c, check_ktilde(e.map, e.sigma, c.r, cfg), out);
  } else if (c.kind == "ktilde-delta") {
    detail::compare_verdict(c, check_ktilde_delta(e.map, e.sigma, c.r, cfg), out);
  } else if (c.kind == "kuo") {
    const Rational w = detail::rational_from_text(c.params.value("w", "1"));
    detail::compare_verdict(c, check_kuo_horn(e.map, e.sigma, c.r, w, cfg), out);
  } else if (c.kind == "thom") {
    detail::compare_verdict(c, thom_check(e.map, e.sigma, c.params.at("a").get<double>(), cfg), out);
  } else if (c.kind == "elliptic") {
    detail::compare_verdict(c, ellipticity_check(detail::generators_for(e, c), e.sigma, cfg), out);
  } else if (c.kind == "loja") {
    detail::run_loja(e, c, cfg, out);
  } else if (c.kind == "ratio") {
    detail::run_ratio(e, c, seed, out);
  } else if (c.kind == "flow") {
    detail::run_flow(e, c, seed, out);
  }
  out.report["kind"] = c.kind;
  if (!c.provenance.empty()) out.report["provenance"] = c.provenance;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/**
 * Runs every check of the entries whose id contains `filter`. Entries run
 * concurrently; outcomes come back in corpus order.
 */
inline CorpusRun run_corpus(const std::vector<CorpusEntry>& entries, const std::string& filter, std::uint64_t seed,
                            bool parallel = true) {
  std::vector<const CorpusEntry*> chosen;
  for (const auto& e : entries)
    if (filter.empty() || e.id.find(filter) != std::string::npos) chosen.push_back(&e);
  auto run_entry = [seed](const CorpusEntry* e) {
    std::vector<CheckOutcome> outs;
    for (const auto& c : e->checks) {
      try {
        outs.push_back(run_check(*e, c, seed));
      } catch (const std::exception& ex) {
        CheckOutcome o;
        o.entry = e->id;
        o.kind = c.kind;
        o.message = std::string("error: ") + ex.what();
        outs.push_back(std::move(o));
      }
    }
    return outs;
  };
  CorpusRun run;
  if (parallel) {
    std::vector<std::future<std::vector<CheckOutcome>>> futures;
    for (const auto* e : chosen) futures.push_back(std::async(std::launch::async, run_entry, e));
    for (auto& f : futures)
      for (auto& o : f.get()) run.outcomes.push_back(std::move(o));
  } else {
    for (const auto* e : chosen)
      for (auto& o : run_entry(e)) run.outcomes.push_back(std::move(o));
  }
  return run;
}

/// Outcomes as JSON; wall times are left out so reports are reproducible.
inline Json to_json(const CorpusRun& run, std::uint64_t seed) {
  Json rows = Json::array();
  for (const auto& o : run.outcomes)
    rows.push_back(Json{{"entry", o.entry},
                        {"kind", o.kind},
                        {"passed", o.passed},
                        {"inconclusive", o.inconclusive},
                        {"message", o.message},
                        {"report", o.report}});
  return Json{{"seed", seed}, {"exit_code", run.exit_code()}, {"checks", std::move(rows)}};
}

}  // namespace jetlab
