#include <jetlab/arc_engine.hpp>
#include <jetlab/io.hpp>
#include <jetlab/jet.hpp>

#include <gtest/gtest.h>

#include <chrono>

using namespace jetlab;

namespace {

PolyMap fm(unsigned m) { return PolyMap({parse_polynomial("x^3", 2) - Polynomial::monomial({1, m}, 3)}); }
PolyMap ex515() { return parse_map({"(x - y^3)^2 + y^10"}); }
const SigmaSet sigma_x = SigmaSet::coordinate(2, {0});

}  // namespace

TEST(ArcOrders, FmAlongResonantArc) {
  for (unsigned m : {3u, 4u, 5u}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Arc arc = Arc::monomial({m, 2});
    const ArcProfile p = profile_arc(fm(m), arc, sigma_x, 3);
    EXPECT_EQ(p.ord_kappa, Order::finite(3 * m - 2)) << m;
    EXPECT_EQ(p.ord_d, Order::finite(m));
    EXPECT_EQ(p.ord_f, Order::finite(3 * m));
    EXPECT_EQ(arc_violates(Condition::kk, p, 3).violated, std::optional<bool>(true));
    const auto kt = arc_violates(Condition::ktilde, p, 3);
    EXPECT_EQ(kt.violated, std::optional<bool>(false));
    EXPECT_EQ(*kt.slack, 0);  // min(4m-2, 3m) = 3m: tight
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
  }
}

TEST(ArcOrders, ProfileExamples) {
  const ArcProfile p = profile_arc(fm(3), Arc::monomial({3, 2}), sigma_x, 3);
  EXPECT_EQ(p.ord_d, Order::finite(3));
  EXPECT_EQ(p.ord_kappa, Order::finite(7));
  EXPECT_EQ(p.ord_f, Order::finite(9));

  const ArcProfile q = profile_arc(PolyMap({parse_polynomial("x^3", 2)}), Arc::monomial({1, 1}), sigma_x, 3);
  EXPECT_EQ(q.ord_d, Order::finite(1));
  EXPECT_EQ(q.ord_kappa, Order::finite(2));
  EXPECT_EQ(q.ord_f, Order::finite(3));

  const ArcProfile inside = profile_arc(fm(3), Arc::monomial({0, 1}), sigma_x, 3);
  EXPECT_TRUE(inside.inside_sigma);
  EXPECT_EQ(inside.ord_d, Order::infinity());
  EXPECT_EQ(arc_violates(Condition::kk, inside, 3).violated, std::optional<bool>(false));

  const ArcProfile x3 = profile_arc(PolyMap({parse_polynomial("x^3", 2)}), Arc::monomial({1, 0}), sigma_x, 3);
  EXPECT_EQ(x3.ord_kappa, Order::finite(2));
}

TEST(ArcOrders, SquareExample) {
  const Arc arc = Arc::monomial({3, 1});
  const ArcProfile p = profile_arc(ex515(), arc, sigma_x, 3);
  EXPECT_EQ(p.ord_kappa, Order::finite(9));
  EXPECT_EQ(p.ord_d, Order::finite(3));
  EXPECT_EQ(p.ord_f, Order::finite(10));
  EXPECT_EQ(arc_violates(Condition::kk, p, 3).violated, std::optional<bool>(true));
  const auto kd = arc_violates(Condition::kk_delta, p, 3);
  EXPECT_EQ(kd.violated, std::optional<bool>(true));  // 9 = r * ord_d
  const auto ktd = arc_violates(Condition::ktilde_delta, p, 3);
  EXPECT_EQ(ktd.violated, std::optional<bool>(false));
  EXPECT_EQ(*ktd.delta_bound, make_rational(2, 3));
  EXPECT_EQ(arc_violates(Condition::kz, p, 3).violated, std::optional<bool>(false));
}

TEST(ArcOrders, CubeNeverViolatesKuiperKuo) {
  const PolyMap f({parse_polynomial("x^3", 2)});
  for (std::uint32_t k = 1; k <= 6; ++k)
    for (std::uint32_t s = 0; s <= 6; ++s) {
      const ArcProfile p = profile_arc(f, Arc::monomial({k, s}, {Rational(1), Rational(-2)}), sigma_x, 3);
      EXPECT_EQ(p.ord_kappa, Order::finite(2 * k));
      const auto j = arc_violates(Condition::kk, p, 3);
      EXPECT_EQ(j.violated, std::optional<bool>(false));
      EXPECT_EQ(*j.slack, 0);
    }
}

TEST(ArcOrders, UnknownOrderIsInconclusive) {
  ArcProfile p;
  p.ord_d = Order::finite(2);
  p.ord_kappa = Order::unknown();
  p.ord_f = Order::finite(100);
  EXPECT_FALSE(arc_violates(Condition::kk, p, 3).violated.has_value());
  // A finite ord_f still decides the K-tilde side when it is small enough.
  p.ord_f = Order::finite(3);
  EXPECT_EQ(arc_violates(Condition::ktilde, p, 3).violated, std::optional<bool>(false));
}

TEST(ArcOrders, KappaViaGramAgreesWithMinors) {
  const std::vector<std::pair<PolyMap, Arc>> cases{
      {fm(3), Arc::monomial({3, 2})},
      {fm(4), Arc::monomial({4, 2})},
      {fm(5), Arc::monomial({5, 2})},
      {ex515(), Arc::monomial({3, 1})},
      {parse_map({"x - y^2", "x^2"}), Arc::monomial({2, 1})},
      {parse_map({"x1^3 - 3*x1*x2^5"}, 3), Arc::monomial({5, 2, 0})},
      {parse_map({"x*y - z^3", "x^2 + y^2*z"}), Arc({{{2, 1}, {3, -1}}, {{1, 2}}, {{3, 1}}})},
  };
  for (const auto& [F, arc] : cases) {
    const std::uint32_t N = 200;
    EXPECT_EQ(kappa_order_along_arc(F, arc, N), kappa_order_via_gram(F, arc, N)) << format_map(F);
  }
}

TEST(ArcOrders, ReparametrizationScalesOrders) {
  const std::vector<std::pair<PolyMap, Arc>> cases{{fm(3), Arc::monomial({3, 2})},
                                                   {ex515(), Arc::monomial({3, 1})},
                                                   {fm(4), Arc({{{1, 1}}, {{1, 1}, {2, 3}}})}};
  for (const auto& [F, arc] : cases)
    for (std::uint32_t q : {2u, 3u}) {
      const ArcProfile a = profile_arc(F, arc, sigma_x, 3);
      const ArcProfile b = profile_arc(F, arc.reparametrized(q), sigma_x, 3);
      EXPECT_EQ(b.ord_d, a.ord_d.scaled(q));
      EXPECT_EQ(b.ord_f, a.ord_f.scaled(q));
      EXPECT_EQ(b.ord_kappa, a.ord_kappa.scaled(q));
      for (auto c : {Condition::kk, Condition::ktilde, Condition::kk_delta, Condition::ktilde_delta, Condition::kz}) {
        const auto ja = arc_violates(c, a, 3);
        const auto jb = arc_violates(c, b, 3);
        EXPECT_EQ(ja.violated, jb.violated);
        EXPECT_EQ(ja.slack, jb.slack);
      }
    }
}

TEST(ArcOrders, BochnakLojasiewiczDeficit) {
  // ord(d * kappa) - ord(f) along (t^m, t^2) is (4m - 2) - 3m = m - 2.
  for (unsigned m : {3u, 4u, 5u, 6u}) {
    const ArcProfile p = profile_arc(fm(m), Arc::monomial({m, 2}), sigma_x, 3);
    EXPECT_EQ((p.ord_d + p.ord_kappa).value() - p.ord_f.value(), static_cast<std::int64_t>(m) - 2);
  }
}

TEST(ArcOrders, FlatPerturbationOrderBound) {
  // j^r h = 0 on Sigma forces ord |h o lambda|^2 >= 2 (r + 1) ord d.
  const Polynomial h = parse_polynomial("x^4*y + 2*x^5 - x^4*y^3", 2);
  ASSERT_TRUE(jet_vanishes_on_sigma(h, sigma_x, 3));
  for (std::uint32_t a = 1; a <= 4; ++a)
    for (std::uint32_t b = 1; b <= 4; ++b) {
      const Arc arc = Arc::monomial({a, b});
      const auto s = compose_arc(h, arc, 200);
      const auto sq = s * s;
      EXPECT_GE(sq.order().value(), 2 * 4 * static_cast<std::int64_t>(a));
    }
}

TEST(RationalRoots, FindsAllNonzeroRoots) {
  // (c - 1)(c + 1)(2c - 3) c = 2c^4 - 3c^3 - 2c^2 + 3c
  const auto roots = rational_roots({0, 3, -2, -3, 2});
  EXPECT_EQ(roots, (std::vector<Rational>{-1, 1, make_rational(3, 2)}));
  EXPECT_TRUE(rational_roots({1, 0, 1}).empty());  // c^2 + 1
  EXPECT_TRUE(rational_roots({5}).empty());
}

TEST(Interpolate, RecoversPolynomial) {
  const std::vector<Rational> xs{1, 2, 3, 4};
  std::vector<Rational> ys;
  for (const auto& x : xs) ys.push_back(2 * x * x * x - x + 7);
  EXPECT_EQ(interpolate(xs, ys), (std::vector<Rational>{7, -1, 0, 2}));
}

TEST(ArcScan, FindsResonantWitnessForFm) {
  ScanOptions opt;
  opt.condition = Condition::kk;
  opt.r = 3;
  opt.max_exponent = 10;
  opt.seed = 7;
  const Verdict v = arc_scan(fm(5), sigma_x, opt);
  ASSERT_EQ(v.status, Status::fails_with_witness);
  ASSERT_TRUE(v.witness && v.witness->arc);
  EXPECT_EQ(*v.witness->arc, Arc::monomial({5, 2}));
  // Re-check the witness from scratch.
  EXPECT_EQ(arc_violates(Condition::kk, profile_arc(fm(5), *v.witness->arc, sigma_x, 3), 3).violated,
            std::optional<bool>(true));
}

TEST(ArcScan, CubeHoldsOnEvidence) {
  ScanOptions opt;
  opt.condition = Condition::kk;
  opt.r = 3;
  opt.max_exponent = 12;
  const auto t0 = std::chrono::steady_clock::now();
  const Verdict v = arc_scan(PolyMap({parse_polynomial("x^3", 2)}), sigma_x, opt);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  EXPECT_GT(v.arcs_checked, 100u);
  EXPECT_EQ(*v.extremal_slack, 0);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(ArcScan, KtildeHoldsForF3) {
  ScanOptions opt;
  opt.condition = Condition::ktilde;
  opt.r = 3;
  opt.max_exponent = 12;
  const Verdict v = arc_scan(fm(3), sigma_x, opt);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  EXPECT_EQ(*v.extremal_slack, 0);
}

TEST(ArcScan, TwoTermArcsAndDeltaBound) {
  ScanOptions opt;
  opt.condition = Condition::ktilde_delta;
  opt.r = 3;
  opt.max_exponent = 6;
  opt.terms = 2;
  const Verdict v = arc_scan(ex515(), sigma_x, opt);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.arc_delta_bound);
  EXPECT_EQ(*v.arc_delta_bound, make_rational(2, 3));
}

TEST(ArcScan, KuiperKuoDeltaFailsForSquareExample) {
  ScanOptions opt;
  opt.condition = Condition::kk_delta;
  opt.r = 3;
  opt.max_exponent = 6;
  const Verdict v = arc_scan(ex515(), sigma_x, opt);
  ASSERT_EQ(v.status, Status::fails_with_witness);
  EXPECT_EQ(*v.witness->arc, Arc::monomial({3, 1}));
}

TEST(ArcScan, CodimensionTwoResonance) {
  ScanOptions opt;
  opt.condition = Condition::ktilde;
  opt.r = 7;
  opt.max_exponent = 6;
  const PolyMap f = parse_map({"x1^3 - 3*x1*x2^5"}, 3);
  const Verdict v = arc_scan(f, SigmaSet::coordinate(3, {0, 1}), opt);
  ASSERT_EQ(v.status, Status::fails_with_witness);
  EXPECT_EQ(*v.witness->arc, Arc::monomial({5, 2, 0}));
}

TEST(ArcScan, CapIsEnforced) {
  ScanOptions opt;
  opt.max_exponent = 12;
  opt.max_arcs = 100;
  EXPECT_THROW(arc_scan(fm(3), sigma_x, opt), std::length_error);
  opt.terms = 3;
  opt.max_arcs = 1'000'000;
  EXPECT_THROW(arc_scan(fm(3), sigma_x, opt), std::invalid_argument);
}

TEST(ArcScan, DeterministicPerSeed) {
  ScanOptions opt;
  opt.condition = Condition::kk;
  opt.max_exponent = 8;
  opt.seed = 99;
  opt.generic_draws = 3;
  const Verdict a = arc_scan(fm(4), sigma_x, opt);
  const Verdict b = arc_scan(fm(4), sigma_x, opt);
  EXPECT_EQ(a.arcs_checked, b.arcs_checked);
  EXPECT_EQ(a.witness->arc, b.witness->arc);
}
