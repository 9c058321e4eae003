#include <jetlab/conditions.hpp>
#include <jetlab/io.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace jetlab;

namespace {

PolyMap fm(int m) { return parse_map_text("x^3 - 3*x*y^" + std::to_string(m), 2); }

const PolyMap ex515 = parse_map_text("(x - y^3)^2 + y^10", 2);
const PolyMap ex511 = parse_map({"x1^3 - 3*x1*x2^5"}, 3);
const SigmaSet sigma_x = parse_sigma("{x1=0}", 2);
const SigmaSet sigma_y = parse_sigma("{x2=0}", 2);

CheckConfig config(std::uint32_t max_exponent = 8) {
  CheckConfig cfg;
  cfg.scan.max_exponent = max_exponent;
  cfg.loja.seed = 7;
  cfg.scan.seed = 7;
  return cfg;
}

void expect_reverifies(const Verdict& v, const PolyMap& F, const SigmaSet& s, unsigned r) {
  EXPECT_TRUE(reverify_witness(v, F, s, r)) << v.condition;
  for (const auto& part : v.parts) EXPECT_TRUE(reverify_witness(part, F, s, r)) << part.condition;
}

}  // namespace

TEST(Loja, GradientOfFmAwayFromLine) {
  const LojaFit fit = loja_exponent(kappa_target(fm(5)), sigma_x, LojaConfig{});
  ASSERT_TRUE(fit.conclusive);
  EXPECT_NEAR(fit.alpha_hat, 2.6, 0.1);
  EXPECT_GE(fit.r2, 0.98);
}

TEST(Loja, GradientOfFmAwayFromOrigin) {
  const LojaFit fit = loja_exponent(kappa_target(fm(4)), SigmaSet::origin(2), LojaConfig{});
  ASSERT_TRUE(fit.conclusive);
  EXPECT_NEAR(fit.alpha_hat, 5.0, 0.15);
}

TEST(Loja, NormOnTheLine) {
  const Target t = [](std::span<const double> x) { return std::abs(x[0]); };
  const LojaFit fit = loja_exponent(t, SigmaSet::origin(1), LojaConfig{});
  ASSERT_TRUE(fit.conclusive);
  EXPECT_NEAR(fit.alpha_hat, 1.0, 1e-9);
  EXPECT_NEAR(fit.C_hat, 1.0, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_EQ(fit.used, (std::vector<bool>{false, false, true, true, true, true, true, true, true, true}));
}

TEST(Loja, ZeroMinimumLeavesExponentUndefined) {
  const Target t = [](std::span<const double> x) { return x[1] * x[1]; };
  const LojaFit fit = loja_exponent(t, sigma_x, LojaConfig{});
  EXPECT_FALSE(fit.conclusive);
  EXPECT_FALSE(fit.note.empty());
}

TEST(Loja, RejectsIncreasingShells) {
  LojaConfig cfg;
  cfg.shells = {0.01, 0.1};
  const Target t = [](std::span<const double> x) { return std::abs(x[0]); };
  EXPECT_THROW(loja_exponent(t, SigmaSet::origin(1), cfg), std::invalid_argument);
}

TEST(Loja, DeterministicPerSeed) {
  const auto a = loja_exponent(kappa_target(fm(3)), sigma_x, LojaConfig{});
  const auto b = loja_exponent(kappa_target(fm(3)), sigma_x, LojaConfig{});
  EXPECT_EQ(a.minima, b.minima);
  EXPECT_EQ(a.alpha_hat, b.alpha_hat);
}

TEST(KuiperKuo, CubeHolds) {
  const PolyMap f = parse_map_text("x^3", 2);
  const Verdict v = check_kuiper_kuo(f, sigma_x, 3, config());
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.exponent);
  EXPECT_NEAR(v.exponent->alpha_hat, 2.0, 0.15);
}

TEST(KuiperKuo, FmFailsAlongResonanceArc) {
  for (int m : {3, 4, 5, 6}) {
    const Verdict v = check_kuiper_kuo(fm(m), sigma_x, 3, config());
    ASSERT_EQ(v.status, Status::fails_with_witness) << m;
    ASSERT_TRUE(v.witness && v.witness->arc);
    // (t^m, t^2) up to reparametrization t -> t^2 for even m.
    const auto ox = v.witness->arc->component_order(0).value(), oy = v.witness->arc->component_order(1).value();
    EXPECT_EQ(2 * ox, m * oy) << format_arc(*v.witness->arc);
    expect_reverifies(v, fm(m), sigma_x, 3);
  }
}

TEST(KuiperKuo, FmHoldsAwayFromTheOtherAxis) {
  for (int m : {4, 6}) {
    const unsigned r = static_cast<unsigned>(3 * m / 2);
    const Verdict v = check_kuiper_kuo(fm(m), sigma_y, r, config());
    EXPECT_EQ(v.status, Status::holds_on_evidence) << m;
    ASSERT_TRUE(v.exponent);
    EXPECT_NEAR(v.exponent->alpha_hat, 1.5 * m - 1, 0.15) << m;
  }
}

TEST(SecondKuiperKuo, FmHoldsWithDeltaTwoOverM) {
  for (int m : {3, 4, 5, 6}) {
    const Verdict v = check_second_kuiper_kuo(fm(m), sigma_x, 3, config());
    EXPECT_EQ(v.status, Status::holds_on_evidence) << m;
    ASSERT_TRUE(v.delta_estimate);
    EXPECT_NEAR(*v.delta_estimate, 2.0 / m, 0.1) << m;
  }
}

TEST(SecondKuiperKuo, SquareExampleFails) {
  const Verdict v = check_second_kuiper_kuo(ex515, sigma_x, 3, config());
  ASSERT_EQ(v.status, Status::fails_with_witness);
  ASSERT_TRUE(v.witness && v.witness->profile);
  EXPECT_EQ(v.witness->profile->ord_kappa, Order::finite(9));
  EXPECT_EQ(v.witness->profile->ord_d, Order::finite(3));
  expect_reverifies(v, ex515, sigma_x, 3);
}

TEST(SecondKuiperKuo, RegularPointHoldsWithCappedDelta) {
  const PolyMap f = parse_map_text("x + y^2", 2);
  const Verdict v = check_second_kuiper_kuo(f, SigmaSet::origin(2), 1, config());
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.delta_estimate);
  EXPECT_GE(*v.delta_estimate, 1.0 - 1e-9);
  EXPECT_LE(*v.delta_estimate, 1.0);
}

TEST(KTilde, FmAndCubeHold) {
  for (int m : {3, 4, 5}) EXPECT_EQ(check_ktilde(fm(m), sigma_x, 3, config()).status, Status::holds_on_evidence) << m;
  EXPECT_EQ(check_ktilde(parse_map_text("x^3", 2), sigma_x, 3, config()).status, Status::holds_on_evidence);
}

TEST(KTilde, CodimensionTwoFails) {
  const SigmaSet s = parse_sigma("{x1=x2=0}", 3);
  const Verdict v = check_ktilde(ex511, s, 7, config(6));
  ASSERT_EQ(v.status, Status::fails_with_witness);
  expect_reverifies(v, ex511, s, 7);
  ASSERT_TRUE(v.exponent);
  EXPECT_NEAR(v.exponent->alpha_hat, 7.5, 0.15);
}

TEST(KTilde, ImpliedByKuiperKuo) {
  const std::vector<std::pair<PolyMap, std::pair<SigmaSet, unsigned>>> cases{
      {parse_map_text("x^3", 2), {sigma_x, 3}}, {fm(4), {sigma_y, 6}}, {parse_map_text("x + y^2", 2), {SigmaSet::origin(2), 1}}};
  for (const auto& [F, sr] : cases) {
    const auto& [s, r] = sr;
    const Status kk = check_kuiper_kuo(F, s, r, config()).status;
    const Status kt = check_ktilde(F, s, r, config()).status;
    EXPECT_EQ(kk, Status::holds_on_evidence);
    EXPECT_TRUE(kk != Status::holds_on_evidence || kt == Status::holds_on_evidence);
  }
}

TEST(KTildeDelta, SquareExampleHoldsWithTwoThirds) {
  CheckConfig cfg = config(6);
  cfg.scan.terms = 2;
  const Verdict v = check_ktilde_delta(ex515, sigma_x, 3, cfg);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.arc_delta_bound);
  EXPECT_EQ(*v.arc_delta_bound, Rational(2, 3));
  ASSERT_TRUE(v.delta_estimate);
  EXPECT_GT(*v.delta_estimate, 0.15);
  EXPECT_LT(*v.delta_estimate, 2.0 / 3.0 + 0.1);
}

// The correction d * kappa / |f| ~ 10 eps^(2/3) biases coarse shells; deep
// shells recover 2/3.
TEST(KTildeDelta, SquareExampleDeepShellsRecoverTwoThirds) {
  CheckConfig cfg = config();
  cfg.run_arcs = false;
  cfg.loja.shells = shell_ladder(8, 24);
  const Verdict v = check_ktilde_delta(ex515, sigma_x, 3, cfg);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.delta_estimate);
  EXPECT_NEAR(*v.delta_estimate, 2.0 / 3.0, 0.05);
}

TEST(KTildeDelta, FmHoldsWithPositiveDelta) {
  const Verdict v = check_ktilde_delta(fm(4), sigma_x, 3, config());
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.delta_estimate);
  EXPECT_GT(*v.delta_estimate, 0.5);
}

// |x| kappa + |x^3| = 4|x|^3 = 4 d^{r+1}: no delta > 0 works, and the arc
// (t, 0) already reaches order (r+1) ord_d. Sampling alone sits on the boundary.
TEST(KTildeDelta, CubeAtBoundaryFailsOnArcs) {
  const PolyMap f = parse_map_text("x^3", 2);
  const Verdict v = check_ktilde_delta(f, sigma_x, 2, config());
  ASSERT_EQ(v.parts.size(), 2u);
  EXPECT_EQ(v.parts[1].status, Status::inconclusive);
  ASSERT_TRUE(v.parts[1].delta_estimate);
  EXPECT_NEAR(*v.parts[1].delta_estimate, 0.0, 0.05);
  EXPECT_EQ(v.parts[0].status, Status::fails_with_witness);
  EXPECT_EQ(v.status, Status::fails_with_witness);
  expect_reverifies(v, f, sigma_x, 2);
}

// On the horn boundary kappa ~ eps^2 sqrt(1 + c eps^(2/3)), so the fit uses deep shells.
TEST(KuoHorn, FmHoldsOnHornSamples) {
  CheckConfig cfg = config();
  cfg.loja.shells = shell_ladder(8, 24);
  const Verdict v = check_kuo_horn(fm(3), sigma_x, 3, 1, cfg);
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_EQ(v.parts.size(), 2u);
  EXPECT_EQ(v.parts[0].status, v.parts[1].status);
  std::size_t in_horn = 0;
  for (const auto& row : v.parts[0].diagnostics) in_horn += row.samples;
  EXPECT_GT(in_horn, 0u);
}

TEST(KuoHorn, CriticalPointInsideHornFails) {
  const PolyMap f = parse_map_text("x^2*y", 2);
  const Verdict v = check_kuo_horn(f, SigmaSet::origin(2), 3, 1, config());
  ASSERT_EQ(v.parts[0].status, Status::fails_with_witness);
  ASSERT_TRUE(v.parts[0].witness && v.parts[0].witness->point);
  EXPECT_EQ(*v.parts[0].witness->value, 0.0);
  EXPECT_TRUE(reverify_witness(v.parts[0], f, SigmaSet::origin(2), 3));
}

TEST(KuoHorn, RejectsNonPositiveWidth) {
  EXPECT_THROW(check_kuo_horn(fm(3), sigma_x, 3, 0, config()), std::invalid_argument);
}

TEST(Thom, ParabolaExampleExponentEight) {
  const PolyMap F = parse_map_text("x - y^2; x^2");
  const Verdict v = thom_check(F, SigmaSet::origin(2), 8.0, config());
  EXPECT_EQ(v.status, Status::holds_on_evidence);
  ASSERT_TRUE(v.exponent);
  EXPECT_NEAR(v.exponent->alpha_hat, 8.0, 0.15);
  EXPECT_EQ(thom_check(F, SigmaSet::origin(2), 7.0, config()).status, Status::fails_with_witness);
}

// On the circle of radius eps, y^2 = eps^2 - x^2 turns T_2 into
// g(x) = (x^2 + x - eps^2)^2 + x^4, minimized for x in [0, eps^2];
// the oracle bisects on g'.
TEST(Thom, ParabolaShellMinimaMatchOneDimensionalOracle) {
  const PolyMap F = parse_map_text("x - y^2; x^2");
  const LojaFit fit = loja_exponent(thom_target(F), SigmaSet::origin(2), LojaConfig{});
  for (std::size_t k = 0; k < fit.shells.size(); ++k) {
    const long double e2 = static_cast<long double>(fit.shells[k]) * fit.shells[k];
    auto g = [&](long double x) { return (x * x + x - e2) * (x * x + x - e2) + x * x * x * x; };
    auto dg = [&](long double x) { return 2 * (x * x + x - e2) * (1 + 2 * x) + 4 * x * x * x; };
    long double lo = 0, hi = e2;
    for (int it = 0; it < 200; ++it) {
      const long double mid = (lo + hi) / 2;
      (dg(mid) < 0 ? lo : hi) = mid;
    }
    const double best = static_cast<double>(g((lo + hi) / 2));
    EXPECT_NEAR(fit.minima[k], best, 1e-3 * best) << fit.shells[k];
  }
}

TEST(Thom, IdentityAndDegenerateMaps) {
  EXPECT_EQ(thom_check(parse_map_text("x; y"), SigmaSet::origin(2), 2.0, config()).status, Status::holds_on_evidence);
  const PolyMap flat = parse_map_text("x; 2*x", 2);
  const Verdict v = thom_check(flat, SigmaSet::origin(2), 2.0, config());
  EXPECT_EQ(v.status, Status::fails_with_witness);
  EXPECT_TRUE(reverify_witness(v, flat, SigmaSet::origin(2), 0));
  EXPECT_THROW(thom_check(flat, SigmaSet::origin(2), 0.0, config()), std::invalid_argument);
}

TEST(Ellipticity, Examples) {
  const Verdict lin = ellipticity_check({parse_polynomial("x", 2)}, sigma_x, config());
  EXPECT_EQ(lin.status, Status::holds_on_evidence);
  ASSERT_TRUE(lin.exponent);
  EXPECT_NEAR(lin.exponent->alpha_hat, 2.0, 1e-9);

  const Verdict kuo = ellipticity_check(kuo_ideal_generators(fm(4)), sigma_x, config());
  EXPECT_EQ(kuo.status, Status::holds_on_evidence);
  ASSERT_TRUE(kuo.exponent);
  EXPECT_TRUE(std::isfinite(kuo.exponent->alpha_hat));

  const Verdict other = ellipticity_check({parse_polynomial("y", 2)}, sigma_x, config());
  EXPECT_EQ(other.status, Status::fails_with_witness);
  ASSERT_TRUE(other.witness && other.witness->point);
  EXPECT_EQ((*other.witness->point)[1], 0.0);
  EXPECT_THROW(ellipticity_check({}, sigma_x, config()), std::invalid_argument);
}

// An arc witness must show up as a decaying ratio target / d^e along lambda(2^-k).
TEST(Coherence, ArcWitnessesDecayOnSamples) {
  struct Case {
    PolyMap F;
    SigmaSet s;
    unsigned r;
    double e;
    Target target;
    Verdict v;
  };
  std::vector<Case> cases;
  for (int m : {3, 5})
    cases.push_back({fm(m), sigma_x, 3, 2.0, kappa_target(fm(m)), check_kuiper_kuo(fm(m), sigma_x, 3, config())});
  cases.push_back({ex515, sigma_x, 3, 3.0, kappa_target(ex515), check_second_kuiper_kuo(ex515, sigma_x, 3, config())});
  for (const auto& c : cases) {
    ASSERT_TRUE(c.v.witness && c.v.witness->arc);
    const Arc& arc = *c.v.witness->arc;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 6; k <= 16; k += 2) {
      const auto x = arc.eval_double(std::ldexp(1.0, -k));
      const double ratio = c.target(x) / std::pow(c.s.distance(x), c.e);
      // Deficit orders are >= 0, so the ratio does not grow; strict for kk witnesses.
      EXPECT_LE(ratio, prev * (1 + 1e-9));
      prev = ratio;
    }
  }
}

TEST(Checks, RejectMismatchedInputs) {
  EXPECT_THROW(check_kuiper_kuo(fm(3), parse_sigma("{x1=0}", 3), 3, config()), std::invalid_argument);
  EXPECT_THROW(check_ktilde(parse_map_text("x; y; x*y", 2), SigmaSet::origin(2), 3, config()), std::invalid_argument);
}
