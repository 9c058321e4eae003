#include <jetlab/io.hpp>
#include <jetlab/random.hpp>
#include <jetlab/sigma.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace jetlab;

TEST(SigmaDistance, Examples) {
  const SigmaSet s(3, {{0}, {1, 2}});
  const std::vector<double> p{3.0, 4.0, 0.0};
  EXPECT_DOUBLE_EQ(s.distance(p), 3.0);
  const std::vector<double> q{0.0, 4.0, 3.0};
  EXPECT_DOUBLE_EQ(s.distance(q), 0.0);
  EXPECT_TRUE(s.contains(q));
  const std::vector<double> r{10.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(s.distance(r), 5.0);
  EXPECT_DOUBLE_EQ(SigmaSet::origin(2).distance(std::vector<double>{3.0, 4.0}), 5.0);
}

TEST(SigmaDistance, ExactSquaredAgreesWithDouble) {
  const SigmaSet s = parse_sigma("{x1=0}|{x2=x3=0}", 3);
  const std::vector<Rational> p{Rational(1, 2), Rational(-3, 4), Rational(5, 7)};
  const std::vector<double> pd{0.5, -0.75, 5.0 / 7.0};
  EXPECT_EQ(s.distance_squared(p), Rational(1, 4));
  EXPECT_NEAR(std::sqrt(s.distance_squared(p).get_d()), s.distance(pd), 1e-15);
}

TEST(SigmaDistance, OneLipschitz) {
  const std::vector<SigmaSet> sets{SigmaSet::origin(3), parse_sigma("{x1=0}", 3), parse_sigma("{x1=x2=0}", 3),
                                   parse_sigma("{x1=0}|{x2=x3=0}", 3)};
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const auto& s : sets) {
    for (int k = 0; k < 2000; ++k) {
      std::vector<double> x(3), y(3), diff(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        diff[i] = x[i] - y[i];
      }
      EXPECT_LE(std::abs(s.distance(x) - s.distance(y)), std::sqrt(diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]) + 1e-12);
    }
  }
}

TEST(SigmaShell, PointsLieOnTheShell) {
  const std::vector<SigmaSet> sets{SigmaSet::origin(2), parse_sigma("{x1=0}", 2), parse_sigma("{x1=x2=0}", 3),
                                   parse_sigma("{x1=0}|{x2=x3=0}", 3)};
  for (const auto& s : sets) {
    for (double eps : {0.25, 1e-3, std::ldexp(1.0, -20)}) {
      for (double frac : {0.0, 0.5}) {
        const auto pts = sample_shell(s, eps, 300, 0.5, 11, ShellOptions{true, frac, 40});
        ASSERT_EQ(pts.size(), 300u);
        for (const auto& x : pts) {
          EXPECT_LE(std::abs(s.distance(x) - eps), 1e-12 * eps);
          for (double v : x) EXPECT_LE(std::abs(v), 0.5 + 1e-15);
        }
      }
    }
  }
}

TEST(SigmaShell, DeterministicInSeed) {
  const SigmaSet s = parse_sigma("{x1=0}", 2);
  EXPECT_EQ(sample_shell(s, 0.01, 50, 0.5, 3), sample_shell(s, 0.01, 50, 0.5, 3));
  EXPECT_NE(sample_shell(s, 0.01, 50, 0.5, 3, {false, 0.0, 40}), sample_shell(s, 0.01, 50, 0.5, 4, {false, 0.0, 40}));
}

TEST(SigmaShell, InfeasibleShellsAreErrors) {
  const SigmaSet s = SigmaSet::origin(2);
  EXPECT_THROW(sample_shell(s, 1.0, 10, 0.5, 0), std::domain_error);
  EXPECT_THROW(sample_shell(s, 0.0, 10, 0.5, 0), std::domain_error);
  EXPECT_THROW(sample_shell(s, -0.1, 10, 0.5, 0), std::domain_error);
}

TEST(SigmaArcOrder, Examples) {
  const SigmaSet line = parse_sigma("{x1=0}", 2);
  EXPECT_EQ(distance_order_along_arc(parse_arc("(t^3, t)"), line), Order::finite(3));
  EXPECT_EQ(distance_order_along_arc(parse_arc("(t^3, t)"), SigmaSet::origin(2)), Order::finite(1));
  EXPECT_TRUE(distance_order_along_arc(parse_arc("(0, t)"), line).is_infinite());
  const SigmaSet u = parse_sigma("{x1=0}|{x2=0}", 2);
  EXPECT_EQ(distance_order_along_arc(parse_arc("(t^2, t^5)"), u), Order::finite(5));
}

// ord_d along an arc matches the slope of log d(lambda(t)) / log t.
TEST(SigmaArcOrder, MatchesNumericLogRatio) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"(t^3 + t^4, -2*t^2, 5*t)", "{x1=0}"},
      {"(t^3, t^7, t)", "{x1=x2=0}"},
      {"(t^2 - t^3, t^5, 3*t^4)", "{x1=0}|{x2=x3=0}"},
      {"(t, t^2, 0)", "origin"}};
  for (const auto& [arc_text, sigma_text] : cases) {
    const Arc arc = parse_arc(arc_text);
    const SigmaSet s = parse_sigma(sigma_text, 3);
    const double ord = static_cast<double>(distance_order_along_arc(arc, s).value());
    for (int k = 10; k <= 20; ++k) {
      const double t1 = std::ldexp(1.0, -k), t2 = std::ldexp(1.0, -k - 1);
      const double d1 = s.distance(arc.eval_double(t1)), d2 = s.distance(arc.eval_double(t2));
      const double slope = std::log(d1 / d2) / std::log(t1 / t2);
      EXPECT_NEAR(slope, ord, 0.02 * ord) << arc_text << " on " << sigma_text << " at k=" << k;
    }
  }
}

TEST(SigmaHorn, Examples) {
  const PolyMap F = parse_map_text("x^3 - 3*x*y^2");
  const SigmaSet s = parse_sigma("{x1=0}", 2);
  const HornSpec horn{F, 3, 1, 1};
  const std::vector<Rational> on{Rational(1, 10), Rational(0)};     // |f| = d^3
  const std::vector<Rational> out{Rational(1, 10), Rational(1, 5)};  // |f| = 11/1000
  EXPECT_TRUE(horn_contains(std::span<const Rational>(on), horn, s));
  EXPECT_FALSE(horn_contains(std::span<const Rational>(out), horn, s));
  const std::vector<Rational> zero{Rational(1, 10), Rational(1, 10)};  // |f| = 2/1000
  const HornSpec wide{F, 3, 20, 1};
  EXPECT_TRUE(horn_contains(std::span<const Rational>(zero), wide, s));
  const std::vector<double> zd{0.1, 0.1};
  EXPECT_TRUE(horn_contains(std::span<const double>(zd), wide, s));
  EXPECT_THROW(horn_contains(std::span<const Rational>(zero), HornSpec{F, 3, 0, 1}, s), std::invalid_argument);
}
