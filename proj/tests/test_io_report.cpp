#include <jetlab/corpus.hpp>
#include <jetlab/report.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace jetlab;

namespace {

Json entry_json(const std::string& id, const Json& checks) {
  return Json{{"id", id}, {"nvars", 2}, {"map", {"x^3"}}, {"sigma", "{x1=0}"}, {"checks", checks}};
}

CorpusEntry entry(const Json& checks) { return entry_from_json(entry_json("t", checks)); }

}  // namespace

TEST(Io, SigmaRoundTrip) {
  for (const char* text : {"{x1=0}|{x2=0}", "{x1=0}", "origin", "{x1=x2=0}"}) {
    const SigmaSet s = parse_sigma(text, 3);
    EXPECT_EQ(parse_sigma(format_sigma(s), 3), s) << text;
    EXPECT_EQ(sigma_from_json(to_json(s)), s) << text;
  }
  EXPECT_EQ(format_sigma(parse_sigma("{x1=0}|{x2=0}", 2)), "{x1=0}|{x2=0}");
  EXPECT_THROW(parse_sigma("{x4=0}", 3), ParseError);
}

TEST(Io, ArcAndMapRoundTrip) {
  const Arc a = parse_arc("(t^3 + 1/2*t^5, -t)");
  EXPECT_EQ(parse_arc(format_arc(a)), a);
  EXPECT_EQ(arc_from_json(to_json(a)), a);
  const PolyMap F = parse_map_text("x - y^2; x^2", 2);
  EXPECT_EQ(map_from_json(to_json(F)), F);
  EXPECT_EQ(parse_map_text(format_map(F), 2), F);
}

TEST(Report, NonFiniteNumbersBecomeNull) {
  LojaFit fit;
  fit.alpha_hat = std::numeric_limits<double>::quiet_NaN();
  fit.C_hat = std::numeric_limits<double>::infinity();
  const Json j = to_json(fit);
  EXPECT_TRUE(j.at("alpha_hat").is_null());
  EXPECT_TRUE(j.at("C_hat").is_null());
  EXPECT_NO_THROW((void)j.dump());
}

TEST(Report, VerdictJsonIsDeterministicForASeed) {
  const PolyMap F = parse_map_text("x^3 - 3*x*y^4", 2);
  const SigmaSet S = parse_sigma("{x1=0}", 2);
  CheckConfig cfg;
  cfg.loja.seed = cfg.scan.seed = 11;
  cfg.loja.shells = shell_ladder(3, 8);
  const std::string a = to_json(check_kuiper_kuo(F, S, 3, cfg)).dump();
  const std::string b = to_json(check_kuiper_kuo(F, S, 3, cfg)).dump();
  EXPECT_EQ(a, b);
  const Json j = Json::parse(a);
  EXPECT_EQ(j.at("status"), "fails-with-witness");
  ASSERT_TRUE(j.contains("witness"));
  // the witness arc can be read back and still violates the condition
  const Verdict v = check_kuiper_kuo(F, S, 3, cfg);
  EXPECT_TRUE(reverify_witness(v, F, S, 3));
}

TEST(Report, TrajectoryJsonFields) {
  const PolyMap f = parse_map_text("x^3", 2), g = parse_map_text("x^3 + x^4*y", 2);
  const FlowProblem P(f, g, parse_sigma("{x1=0}", 2), 3);
  FlowOptions opt;
  opt.step_cap = 0.05;
  const std::vector<double> x0{0.2, 0.1};
  const Json j = to_json(integrate(P, x0, 0.0, 1.0, opt));
  ASSERT_FALSE(j.at("samples").empty());
  for (const char* key : {"t", "x", "F_residual", "d_sigma"}) EXPECT_TRUE(j.at("samples").front().contains(key)) << key;
  EXPECT_EQ(j.at("status"), "completed");
}

TEST(Report, PlotCsvSkipsNonPositiveMinima) {
  std::vector<ShellRow> rows{{0.5, 0.25, {}, 10, false}, {0.25, 0.0, {}, 10, true}, {0.125, 1.0 / 64, {}, 10, true}};
  const std::string csv = plot_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "log_eps,log_min,used_in_fit");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find(",0\n"), std::string::npos);
}

TEST(Corpus, SchemaErrors) {
  const Json ok = Json::array({Json{{"kind", "kk"}, {"r", 3}}});
  EXPECT_NO_THROW(entry(ok));
  EXPECT_THROW(entry(Json::array({Json{{"kind", "kz-nope"}, {"r", 3}}})), CorpusError);
  EXPECT_THROW(entry(Json::array({Json{{"kind", "kk"}}})), CorpusError);
  EXPECT_THROW(entry(Json::array({Json{{"kind", "thom"}}})), CorpusError);
  EXPECT_THROW(entry(Json::array({Json{{"kind", "flow"}, {"r", 3}}})), CorpusError);
  EXPECT_THROW(entry(Json::array({Json{{"kind", "kk"}, {"r", 3}, {"expect", {{"status", "maybe"}}}}})), CorpusError);
  EXPECT_THROW(entry(Json::array({Json{{"kind", "kk"}, {"r", 3}, {"expect", {{"arc_delta_bound", "2/x"}}}}})), CorpusError);

  Json bad_map = entry_json("t", ok);
  bad_map["map"] = {"x^^3"};
  EXPECT_THROW(entry_from_json(bad_map), CorpusError);
  Json bad_nvars = entry_json("t", ok);
  bad_nvars["nvars"] = 1;
  bad_nvars["map"] = {"x1 + x2"};
  EXPECT_THROW(entry_from_json(bad_nvars), CorpusError);

  EXPECT_THROW(load_corpus(Json::object()), CorpusError);
  EXPECT_THROW(load_corpus(Json{{"entries", {entry_json("a", ok), entry_json("a", ok)}}}), CorpusError);
  EXPECT_THROW(load_corpus_file("/nonexistent/corpus.json"), CorpusError);
}

TEST(Corpus, ExitCodes) {
  const CorpusEntry met = entry(Json::array({Json{{"kind", "kk"}, {"r", 3}, {"expect", {{"status", "holds-on-evidence"}}}}}));
  EXPECT_EQ(run_corpus({met}, "", 1).exit_code(), 0);

  const CorpusEntry wrong =
      entry(Json::array({Json{{"kind", "kk"}, {"r", 3}, {"expect", {{"status", "fails-with-witness"}}}}}));
  EXPECT_EQ(run_corpus({wrong}, "", 1).exit_code(), 1);

  // sampling alone sits on the boundary here and cannot decide
  const CorpusEntry undecided = entry(Json::array({Json{{"kind", "ktilde-delta"},
                                                        {"r", 2},
                                                        {"overrides", {{"arcs", false}}},
                                                        {"expect", {{"status", "holds-on-evidence"}}}}}));
  const CorpusRun run = run_corpus({undecided}, "", 1);
  ASSERT_EQ(run.outcomes.size(), 1u);
  EXPECT_TRUE(run.outcomes[0].inconclusive);
  EXPECT_EQ(run.exit_code(), 2);

  CorpusRun mixed;
  mixed.outcomes = {CheckOutcome{"a", "kk", false, true, "", {}, 0}, CheckOutcome{"b", "kk", false, false, "", {}, 0}};
  EXPECT_EQ(mixed.exit_code(), 1);
}

TEST(Corpus, FilterSelectsById) {
  const auto entries = load_corpus(Json{{"entries",
                                         {entry_json("alpha", Json::array({Json{{"kind", "ktilde"}, {"r", 3}}})),
                                          entry_json("beta", Json::array({Json{{"kind", "kk"}, {"r", 3}}}))}}});
  const CorpusRun run = run_corpus(entries, "bet", 0);
  ASSERT_EQ(run.outcomes.size(), 1u);
  EXPECT_EQ(run.outcomes[0].entry, "beta");
}

TEST(Corpus, ParallelRunMatchesSerialByteForByte) {
  const auto entries = load_corpus(Json{{"entries",
                                         {entry_json("one", Json::array({Json{{"kind", "kk"}, {"r", 3}}})),
                                          entry_json("two", Json::array({Json{{"kind", "ktilde"}, {"r", 3}},
                                                                         Json{{"kind", "loja"}, {"target", "kappa"}}}))}}});
  const std::string par = to_json(run_corpus(entries, "", 5, true), 5).dump();
  const std::string ser = to_json(run_corpus(entries, "", 5, false), 5).dump();
  EXPECT_EQ(par, ser);
}

TEST(Corpus, ShippedFileIsWellFormed) {
  const auto entries = load_corpus_file(JETLAB_CORPUS_FILE);
  EXPECT_GE(entries.size(), 10u);
  const std::set<std::string> provenances{"published", "computed", "elementary"};
  std::set<std::string> kinds;
  for (const auto& e : entries) {
    EXPECT_FALSE(e.checks.empty()) << e.id;
    for (const auto& c : e.checks) {
      EXPECT_TRUE(provenances.count(c.provenance)) << e.id << " " << c.kind;
      kinds.insert(c.kind);
    }
  }
  for (const char* k : {"kk", "kk-delta", "ktilde", "ktilde-delta", "kuo", "thom", "elliptic", "loja", "ratio", "flow"})
    EXPECT_TRUE(kinds.count(k)) << k;
}
