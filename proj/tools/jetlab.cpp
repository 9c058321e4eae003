// jetlab: command-line front end.
//
// Exit codes: 0 holds / all expectations met, 1 fails or mismatch,
// 2 inconclusive, 3 input error.

#include <jetlab/corpus.hpp>
#include <jetlab/report.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#ifndef JETLAB_DEFAULT_CORPUS
#define JETLAB_DEFAULT_CORPUS "corpus/corpus.json"
#endif

namespace {

using namespace jetlab;

constexpr int kInputError = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  bool json = false;
  std::string plot_path;
  std::string out_path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A map given as a JSON file, a text file, or inline text ("x - y^2; x^2").
PolyMap load_map(const std::string& arg, std::size_t nvars) {
  std::string text = arg;
  if (std::filesystem::is_regular_file(arg)) text = read_file(arg);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    const Json j = Json::parse(text);
    if (j.is_array() && !j.empty() && j.front().is_string()) return parse_map(j.get<std::vector<std::string>>(), nvars);
    return map_from_json(j);
  }
  return parse_map_text(text, nvars);
}

SigmaSet load_sigma(const std::string& arg, std::size_t nvars) {
  if (std::filesystem::is_regular_file(arg)) return sigma_from_json(Json::parse(read_file(arg)));
  return parse_sigma(arg, nvars);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<Rational> parse_point(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& tok : split(s, ',')) {
    Rational q;
    const auto a = tok.find_first_not_of(' '), b = tok.find_last_not_of(' ');
    if (q.set_str(tok.substr(a, b - a + 1), 10) != 0) throw InputError("bad coordinate '" + tok + "'");
    q.canonicalize();
    out.push_back(q);
  }
  return out;
}

std::vector<double> shells_from(const std::vector<int>& ks) {
  if (ks.size() != 2 || ks[0] >= ks[1]) throw InputError("--shells takes FIRST,LAST with FIRST < LAST");
  return shell_ladder(ks[0], ks[1]);
}

/// Writes the report to --out, or to stdout with --json.
void emit(const Globals& g, const Json& report, const std::string& summary) {
  const std::string text = report.dump(2) + "\n";
  if (!g.out_path.empty()) {
    std::ofstream out(g.out_path);
    if (!out) throw InputError("cannot write " + g.out_path);
    out << text;
  }
  if (g.json)
    std::cout << text;
  else
    std::cout << summary;
}

void emit_plot(const Globals& g, const std::string& csv) {
  if (g.plot_path.empty()) return;
  std::ofstream out(g.plot_path);
  if (!out) throw InputError("cannot write " + g.plot_path);
  out << csv;
}

int status_code(Status s) {
  switch (s) {
    case Status::holds_on_evidence: return 0;
    case Status::fails_with_witness: return 1;
    case Status::inconclusive: return 2;
  }
  return 2;
}

std::string verdict_summary(const Verdict& v) {
  std::ostringstream s;
  s << std::setprecision(6) << v.condition << ": " << to_string(v.status) << " (" << to_string(v.mode) << ")\n";
  if (v.exponent) s << "  alpha_hat " << v.exponent->alpha_hat << ", r2 " << v.exponent->r2 << "\n";
  if (v.target_exponent) s << "  target exponent " << *v.target_exponent << "\n";
  if (v.delta_estimate) s << "  delta_hat " << *v.delta_estimate << "\n";
  if (v.arc_delta_bound) s << "  arc delta bound " << v.arc_delta_bound->get_str() << "\n";
  if (v.witness) {
    if (v.witness->arc) s << "  witness arc " << format_arc(*v.witness->arc) << "\n";
    if (v.witness->profile)
      s << "  orders: d " << v.witness->profile->ord_d << ", f " << v.witness->profile->ord_f << ", kappa "
        << v.witness->profile->ord_kappa << "\n";
    if (v.witness->point) {
      s << "  witness point (";
      for (std::size_t i = 0; i < v.witness->point->size(); ++i) s << (i ? ", " : "") << (*v.witness->point)[i];
      s << ")\n";
    }
  }
  for (const auto& n : v.notes) s << "  note: " << n << "\n";
  for (const auto& p : v.parts) s << "  part " << p.condition << ": " << to_string(p.status) << "\n";
  if (v.mode != Mode::sampling) s << "  arcs checked " << v.arcs_checked << "\n";
  return s.str();
}

struct MapArgs {
  std::string map;
  std::string sigma = "origin";
  std::size_t nvars = 0;
};

void add_map_args(CLI::App* sub, MapArgs& a, bool with_sigma = true) {
  sub->add_option("--map", a.map, "map: JSON file, text file, or inline text such as \"x - y^2; x^2\"")->required();
  if (with_sigma) sub->add_option("--sigma", a.sigma, "\"origin\", \"{x1=0}\", \"{x1=0}|{x2=0}\" or a JSON file");
  sub->add_option("--nvars", a.nvars, "number of variables when the text does not show it");
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
  MapArgs m;
  std::string point;
  std::string what = "kappa,nu,eta,eta_tilde,K2,T2";
};

int run_measure(const Globals& g, const MeasureArgs& a) {
  const PolyMap F = load_map(a.m.map, a.m.nvars);
  const auto pt = parse_point(a.point);
  if (pt.size() != F.nvars()) throw InputError("point has " + std::to_string(pt.size()) + " coordinates, map needs " +
                                              std::to_string(F.nvars()));
  std::vector<double> x;
  for (const auto& q : pt) x.push_back(q.get_d());
  const CompiledMap C(F);
  const auto M = C.jacobian(x);
  Json report{{"point", detail::reals(x)}, {"map", format_map(F)}};
  std::ostringstream s;
  s << std::setprecision(10);
  for (const auto& w : split(a.what, ',')) {
    if (w == "kappa") {
      report["kappa"] = kuo_kappa(M);
      Matrix<Rational> Mq;
      for (const auto& row : jacobian(F)) {
        std::vector<Rational> r;
        for (const auto& e : row) r.push_back(e.eval(pt));
        Mq.push_back(std::move(r));
      }
      report["kappa_squared_exact"] = detail::rational_json(kuo_kappa_squared_exact(Mq));
    } else if (w == "nu") {
      report["nu"] = rabier_nu(M);
    } else if (w == "eta") {
      report["eta"] = eta(M);
    } else if (w == "eta_tilde") {
      report["eta_tilde"] = eta_tilde(M);
    } else if (w.size() >= 2 && (w[0] == 'K' || w[0] == 'T')) {
      const unsigned m = static_cast<unsigned>(std::stoul(w.substr(1)));
      const Rational q = w[0] == 'K' ? kuo_quantity_exact(F, pt, m) : thom_quantity_exact(F, pt, m);
      report[w] = detail::rational_json(q);
    } else {
      throw InputError("unknown measure '" + w + "'");
    }
    const Json& v = report[w];
    s << w << " = " << (v.is_object() ? v.at("value").dump() + " (" + v.at("num").dump() + "/" + v.at("den").dump() + ")" : v.dump())
      << "\n";
  }
  emit(g, report, s.str());
  return 0;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  MapArgs m;
  unsigned r = 0;
  std::string condition;
  std::string w = "1";
  double a = 0.0;
  std::vector<int> shells;
  std::size_t samples = 0;
  std::uint32_t max_exp = 0;
  unsigned terms = 0;
  bool no_arcs = false;
  bool no_sampling = false;
};

CheckConfig config_from(const Globals& g, const CheckArgs& a) {
  CheckConfig cfg;
  cfg.loja.seed = g.seed;
  cfg.scan.seed = g.seed;
  if (!a.shells.empty()) cfg.loja.shells = shells_from(a.shells);
  if (a.samples) cfg.loja.samples_per_shell = a.samples;
  if (a.max_exp) cfg.scan.max_exponent = a.max_exp;
  if (a.terms) cfg.scan.terms = a.terms;
  cfg.run_arcs = !a.no_arcs;
  cfg.run_sampling = !a.no_sampling;
  return cfg;
}

int run_check_cmd(const Globals& g, const CheckArgs& a) {
  const PolyMap F = load_map(a.m.map, a.m.nvars);
  const SigmaSet sigma = load_sigma(a.m.sigma, F.nvars());
  const CheckConfig cfg = config_from(g, a);
  const std::string& c = a.condition;
  auto need_r = [&] {
    if (a.r == 0) throw InputError("--r is required for " + c);
  };
  Verdict v;
  if (c == "kk") {
    need_r();
    v = check_kuiper_kuo(F, sigma, a.r, cfg);
  } else if (c == "kk-delta") {
    need_r();
    v = check_second_kuiper_kuo(F, sigma, a.r, cfg);
  } else if (c == "ktilde") {
    need_r();
    v = check_ktilde(F, sigma, a.r, cfg);
  } else if (c == "ktilde-delta") {
    need_r();
    v = check_ktilde_delta(F, sigma, a.r, cfg);
  } else if (c == "kuo") {
    need_r();
    Rational w;
    if (w.set_str(a.w, 10) != 0) throw InputError("bad width '" + a.w + "'");
    w.canonicalize();
    v = check_kuo_horn(F, sigma, a.r, w, cfg);
  } else if (c == "thom") {
    if (a.a <= 0) throw InputError("--a is required for thom");
    v = thom_check(F, sigma, a.a, cfg);
  } else if (c == "elliptic") {
    v = ellipticity_check(F.components(), sigma, cfg);
  } else {
    throw InputError("unknown condition '" + c + "'");
  }
  Json report = to_json(v);
  report["map"] = format_map(F);
  report["sigma"] = format_sigma(sigma);
  if (a.r) report["r"] = a.r;
  emit(g, report, verdict_summary(v));
  emit_plot(g, plot_csv(v.diagnostics));
  return status_code(v.status);
}

// ---------------------------------------------------------------------------

struct ScanArgs {
  MapArgs m;
  unsigned r = 0;
  std::string condition = "kk";
  std::uint32_t max_exp = 12;
  unsigned terms = 1;
  std::size_t max_arcs = 1'000'000;
  std::string arc;
};

int run_arc_scan(const Globals& g, const ScanArgs& a) {
  const PolyMap F = load_map(a.m.map, a.m.nvars);
  const SigmaSet sigma = load_sigma(a.m.sigma, F.nvars());
  if (a.r == 0) throw InputError("--r is required");
  const Condition cond = condition_from_string(a.condition);
  if (!a.arc.empty()) {
    const Arc arc = parse_arc(a.arc);
    if (arc.nvars() != F.nvars()) throw InputError("arc has the wrong number of components");
    const ArcProfile prof = profile_arc(F, arc, sigma, a.r);
    const ArcJudgement j = arc_violates(cond, prof, a.r);
    Json report{{"arc", to_json(arc)}, {"profile", to_json(prof)}, {"condition", a.condition}, {"r", a.r},
                {"violated", j.violated ? Json(*j.violated) : Json(nullptr)}};
    if (j.slack) report["slack"] = detail::rational_json(*j.slack);
    if (j.delta_bound) report["delta_bound"] = detail::rational_json(*j.delta_bound);
    std::ostringstream s;
    s << format_arc(arc) << ": ord d " << prof.ord_d << ", ord f " << prof.ord_f << ", ord kappa " << prof.ord_kappa
      << "\n"
      << a.condition << " at r = " << a.r << ": "
      << (!j.violated ? "undecided" : *j.violated ? "violated along this arc" : "not violated along this arc") << "\n";
    if (j.delta_bound) s << "largest delta along this arc " << j.delta_bound->get_str() << "\n";
    emit(g, report, s.str());
    return !j.violated ? 2 : *j.violated ? 1 : 0;
  }
  ScanOptions opt;
  opt.condition = cond;
  opt.r = a.r;
  opt.max_exponent = a.max_exp;
  opt.terms = a.terms;
  opt.seed = g.seed;
  opt.max_arcs = a.max_arcs;
  const Verdict v = arc_scan(F, sigma, opt);
  emit(g, to_json(v), verdict_summary(v));
  return status_code(v.status);
}

// ---------------------------------------------------------------------------

struct LojaArgs {
  MapArgs m;
  std::string target = "kappa";
  unsigned thom_m = 2;
  std::vector<int> shells;
  std::size_t samples = 0;
};

int run_loja(const Globals& g, const LojaArgs& a) {
  const PolyMap F = load_map(a.m.map, a.m.nvars);
  const SigmaSet sigma = load_sigma(a.m.sigma, F.nvars());
  LojaConfig cfg;
  cfg.seed = g.seed;
  if (!a.shells.empty()) cfg.shells = shells_from(a.shells);
  if (a.samples) cfg.samples_per_shell = a.samples;
  Target t;
  if (a.target == "kappa")
    t = kappa_target(F);
  else if (a.target == "ktilde")
    t = ktilde_target(F, sigma);
  else if (a.target == "thom")
    t = thom_target(F, a.thom_m);
  else if (a.target == "elliptic")
    t = sum_of_squares_target(F.components());
  else
    throw InputError("unknown target '" + a.target + "'");
  const LojaFit fit = loja_exponent(t, sigma, cfg);
  Json report = to_json(fit);
  report["target"] = a.target;
  report["seed"] = g.seed;
  std::ostringstream s;
  s << std::setprecision(6) << a.target << ": alpha_hat " << fit.alpha_hat << ", C_hat " << fit.C_hat << ", r2 " << fit.r2
    << (fit.conclusive ? "" : " (inconclusive)") << "\n";
  if (!fit.note.empty()) s << "  note: " << fit.note << "\n";
  emit(g, report, s.str());
  emit_plot(g, plot_csv(fit));
  return fit.conclusive ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct FlowArgs {
  std::string f, g, sigma = "origin", seeds;
  std::size_t nvars = 0;
  unsigned r = 0;
  double tol = 1e-3;
  double radius = 1.0;
  std::size_t count = 8;
};

std::vector<std::vector<double>> load_seeds(const std::string& path) {
  Json j = Json::parse(read_file(path));
  if (j.is_object()) j = j.at("seeds");
  return j.get<std::vector<std::vector<double>>>();
}

int run_flow(const Globals& g, const FlowArgs& a) {
  const PolyMap f = load_map(a.f, a.nvars);
  const PolyMap gm = load_map(a.g, f.nvars());
  const SigmaSet sigma = load_sigma(a.sigma, f.nvars());
  if (a.r == 0) throw InputError("--r is required");
  const FlowProblem P(f, gm, sigma, a.r, a.radius);
  FlowOptions opt;
  opt.step_cap = a.tol;
  const auto seeds = a.seeds.empty()
                         ? find_level_seeds(f, sigma, std::vector<double>(f.size(), 0.0), a.count,
                                            std::min(0.5, a.radius / 2), g.seed)
                         : load_seeds(a.seeds);
  for (const auto& s : seeds)
    if (s.size() != f.nvars()) throw InputError("seed point with the wrong dimension");
  // Seeds are independent; each trajectory is sequential.
  std::vector<std::future<Roundtrip>> jobs;
  for (const auto& s : seeds) jobs.push_back(std::async(std::launch::async, [&P, &opt, s] { return roundtrip_check(P, s, opt); }));
  Json trajs = Json::array();
  double max_res = 0.0, max_rt = 0.0;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Roundtrip rt = jobs[i].get();
    Json t = to_json(rt.forward);
    t["seed_point"] = detail::reals(seeds[i]);
    t["roundtrip"] = detail::real(rt.deviation);
    if (rt.ok()) {
      max_res = std::max({max_res, rt.forward.max_residual, rt.backward.max_residual});
      max_rt = std::max(max_rt, rt.deviation);
      t["envelope_respected"] = envelope_respected(rt.forward, fitted_field_constant(rt.forward));
    } else {
      ++failures;
    }
    trajs.push_back(std::move(t));
  }
  Json report{{"seed", g.seed},          {"step_cap", a.tol},        {"r", a.r},
              {"max_residual", max_res}, {"max_roundtrip", max_rt}, {"failures", failures},
              {"trajectories", std::move(trajs)}};
  std::ostringstream s;
  s << std::setprecision(4) << seeds.size() << " trajectories, max residual " << max_res << ", max roundtrip " << max_rt;
  if (failures) s << ", " << failures << " failed";
  s << "\n";
  emit(g, report, s.str());
  return failures ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct CorpusArgs {
  std::string file = JETLAB_DEFAULT_CORPUS;
  std::string filter;
  bool serial = false;
};

int run_corpus_cmd(const Globals& g, const CorpusArgs& a) {
  const auto entries = load_corpus_file(a.file);
  const auto start = std::chrono::steady_clock::now();
  const CorpusRun run = run_corpus(entries, a.filter, g.seed, !a.serial);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream s;
  std::size_t passed = 0;
  for (const auto& o : run.outcomes) {
    passed += o.passed;
    s << (o.passed ? "PASS " : o.inconclusive ? "INCONCLUSIVE " : "FAIL ") << std::left << std::setw(18) << o.entry
      << std::setw(14) << o.kind << o.message << "\n";
  }
  s << passed << "/" << run.outcomes.size() << " checks met expectations in " << std::fixed << std::setprecision(1)
    << secs << " s\n";
  emit(g, to_json(run, g.seed), s.str());
  return run.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jetlab: relative jet sufficiency, numerically and along arcs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_flag("--json", g.json, "print the JSON report to stdout");
  app.add_option("--out", g.out_path, "write the JSON report to a file");
  app.add_option("--emit-plot-data", g.plot_path, "write (log eps, log min) CSV to a file");

  MeasureArgs ma;
  auto* measure = app.add_subcommand("measure", "degeneracy measures and K_m/T_m at a point");
  add_map_args(measure, ma.m, false);
  measure->add_option("--point", ma.point, "comma-separated coordinates, rationals allowed")->required();
  measure->add_option("--what", ma.what, "comma list from kappa,nu,eta,eta_tilde,K<m>,T<m>")->capture_default_str();

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "decide a condition by arcs and sampling");
  add_map_args(check, ca.m);
  check->add_option("--condition", ca.condition, "kk|kk-delta|kuo|ktilde|ktilde-delta|thom|elliptic")->required();
  check->add_option("--r", ca.r, "jet order");
  check->add_option("--w", ca.w, "horn width for kuo");
  check->add_option("--a", ca.a, "exponent for thom");
  check->add_option("--shells", ca.shells, "FIRST,LAST: shells 2^-FIRST..2^-LAST")->delimiter(',');
  check->add_option("--samples", ca.samples, "samples per shell");
  check->add_option("--max-exp", ca.max_exp, "largest arc exponent");
  check->add_option("--terms", ca.terms, "terms per arc component (1 or 2)");
  check->add_flag("--no-arcs", ca.no_arcs, "sampling only");
  check->add_flag("--no-sampling", ca.no_sampling, "arcs only");

  ScanArgs sa;
  auto* scan = app.add_subcommand("arc-scan", "search test arcs for a violation, or profile one arc");
  add_map_args(scan, sa.m);
  scan->add_option("--r", sa.r, "jet order")->required();
  scan->add_option("--condition", sa.condition, "kk|ktilde|kk-delta|ktilde-delta|kz")->capture_default_str();
  scan->add_option("--max-exp", sa.max_exp, "largest arc exponent")->capture_default_str();
  scan->add_option("--terms", sa.terms, "terms per component (1 or 2)")->capture_default_str();
  scan->add_option("--max-arcs", sa.max_arcs, "refuse lattices larger than this")->capture_default_str();
  scan->add_option("--arc", sa.arc, "profile this arc only, e.g. \"(t^3, t)\"");

  LojaArgs la;
  auto* loja = app.add_subcommand("loja", "estimate a Lojasiewicz exponent against d(x, Sigma)");
  add_map_args(loja, la.m);
  loja->add_option("--target", la.target, "kappa|ktilde|thom|elliptic")->capture_default_str();
  loja->add_option("--m", la.thom_m, "power m for the thom target")->capture_default_str();
  loja->add_option("--shells", la.shells, "FIRST,LAST")->delimiter(',');
  loja->add_option("--samples", la.samples, "samples per shell");

  FlowArgs fa;
  auto* flow = app.add_subcommand("flow", "integrate the Kuo vector field from f to g");
  flow->add_option("--f", fa.f, "map f")->required();
  flow->add_option("--g", fa.g, "perturbed map g")->required();
  flow->add_option("--sigma", fa.sigma, "Sigma");
  flow->add_option("--nvars", fa.nvars, "number of variables");
  flow->add_option("--r", fa.r, "jet order")->required();
  flow->add_option("--seeds", fa.seeds, "JSON file with seed points; default: points on f = 0");
  flow->add_option("--count", fa.count, "number of generated seeds")->capture_default_str();
  flow->add_option("--tol", fa.tol, "integration step cap")->capture_default_str();
  flow->add_option("--radius", fa.radius, "neighbourhood radius")->capture_default_str();

  CorpusArgs co;
  auto* corpus = app.add_subcommand("corpus", "run the example corpus against its expectations");
  corpus->add_option("--file", co.file, "corpus JSON")->capture_default_str();
  corpus->add_option("--filter", co.filter, "only entries whose id contains this");
  corpus->add_flag("--serial", co.serial, "run entries one after another");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*measure) return run_measure(g, ma);
    if (*check) return run_check_cmd(g, ca);
    if (*scan) return run_arc_scan(g, sa);
    if (*loja) return run_loja(g, la);
    if (*flow) return run_flow(g, fa);
    if (*corpus) return run_corpus_cmd(g, co);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return kInputError;
  } catch (const Json::exception& e) {
    std::cerr << "JSON error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kInputError;
  } catch (const std::length_error& e) {
    std::cerr << "too large: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return 0;
}
