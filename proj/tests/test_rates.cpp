#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ergowass/rates.hpp"

using namespace ergowass;

namespace {

// Exact rational arithmetic for hand-evaluated values.
struct Frac {
  long long n, d;
  Frac(long long num, long long den = 1) : n(num), d(den) {  // NOLINT(google-explicit-constructor)
    if (d < 0) n = -n, d = -d;
    const long long g = std::gcd(n < 0 ? -n : n, d);
    n /= g, d /= g;
  }
  double value() const { return static_cast<double>(n) / static_cast<double>(d); }
};
Frac operator+(Frac a, Frac b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
Frac operator-(Frac a, Frac b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
Frac operator*(Frac a, Frac b) { return {a.n * b.n, a.d * b.d}; }
Frac operator/(Frac a, Frac b) { return {a.n * b.d, a.d * b.n}; }
bool operator<(Frac a, Frac b) { return a.n * b.d < b.n * a.d; }
bool operator==(Frac a, Frac b) { return a.n == b.n && a.d == b.d; }

// Case lists from the proof of the H1 rate, written independently of the
// zeta form: p < d splits at q = dp/(d-p), p >= d splits at p = d.
struct Case {
  Frac exponent;
  Frac log_power;
};
Case h1_cases(Frac p, Frac q, long long d) {
  const Frac D(d);
  if (p < D) {
    const Frac edge = D * p / (D - p);
    if (edge < q) return {p / (Frac(2) * D + 1), 0};
    if (q == edge) return {p / (Frac(2) * D + 1), Frac(2) * D / (Frac(2) * D + 1)};
    return {(q - p) / (Frac(2) * q + q / p - 1), 0};
  }
  if (D < p) return {(q - p) / (Frac(2) * q + q / p - 1), 0};
  return {(q - D) / (Frac(2) * q + q / D - 1), Frac(2) * q / (Frac(2) * q + q / D - 1)};
}

const std::vector<double> kGrid = {0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6, 6.5, 7, 7.5, 8};

}  // namespace

TEST(RateH1, HandValues) {
  const auto a = rate_h1(2, 5, 1);
  EXPECT_NEAR(a.exponent, 6.0 / 23.0, 1e-15);
  EXPECT_NEAR(*a.derived, 5.0 / 3.0, 1e-15);
  EXPECT_EQ(a.log_power, 0.0);

  const auto b = rate_h1(1, 2, 3);
  EXPECT_NEAR(b.exponent, 1.0 / 7.0, 1e-15);
  EXPECT_EQ(b.log_power, 0.0);

  const auto c = rate_h1(2, 4, 4);
  EXPECT_NEAR(c.log_power, 8.0 / 9.0, 1e-15);
}

TEST(RateH1, DomainViolations) {
  EXPECT_THROW(rate_h1(2, 1.5, 3), Error);
  EXPECT_THROW(rate_h1(0.5, 1.0, 3), Error);  // q must exceed 1 too
  EXPECT_THROW(rate_h1(-1, 3, 3), Error);
  EXPECT_THROW(rate_h1(1, 3, 0), Error);
}

TEST(RateH1, AgreesWithCaseLists) {
  for (long long d = 1; d <= 6; ++d) {
    for (long long pn = 1; pn <= 16; ++pn) {
      for (long long qn = 1; qn <= 40; ++qn) {
        const Frac p(pn, 2), q(qn, 2);
        if (!(p < q) || !(Frac(1) < q)) continue;
        const auto want = h1_cases(p, q, d);
        const auto got = rate_h1(p.value(), q.value(), static_cast<int>(d));
        EXPECT_NEAR(got.exponent, want.exponent.value(), 1e-12) << "p=" << p.value() << " q=" << q.value() << " d=" << d;
        EXPECT_NEAR(got.log_power, want.log_power.value(), 1e-12) << "p=" << p.value() << " q=" << q.value() << " d=" << d;
      }
    }
  }
}

TEST(RateH2, PaperCases) {
  const auto a = rate_h2(2, 9, 2);
  EXPECT_DOUBLE_EQ(a.exponent, 0.5);
  EXPECT_EQ(a.log_power, 0.0);
  EXPECT_NEAR(rate_h2(1, 5, 4).exponent, 1.0 / 6.0, 1e-15);
}

TEST(RateH2, BoundaryHandValue) {
  const auto r = rate_h2(3, 9, 4);
  EXPECT_NEAR(*r.derived, 0.25, 1e-15);
  EXPECT_NEAR(r.exponent, 4.0 / 9.0, 1e-15);
  EXPECT_GE(r.log_power, 1.0);
}

TEST(RateH3, PaperCases) {
  const auto a = rate_h3(2, 5, 3);
  EXPECT_DOUBLE_EQ(a.exponent, 0.5);
  EXPECT_EQ(a.log_power, 0.0);
  EXPECT_NEAR(rate_h3(1, 4, 4).exponent, 0.25, 1e-15);
  const auto c = rate_h3(1, 3, 2);
  EXPECT_DOUBLE_EQ(c.exponent, 0.5);
  EXPECT_EQ(c.log_power, 1.0);
}

TEST(RateAs, HandValues) {
  const auto a = rate_as(2, 20, 1, Hypothesis::H2, 1.7);
  EXPECT_NEAR(a.exponent, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(a.log_power, 1.7);
  EXPECT_NEAR(rate_as(2, 4, 2, Hypothesis::H3, 1.5).exponent, 1.0 / 6.0, 1e-15);
  const auto c = rate_as(1, 4, 1, Hypothesis::H3, 2.0);
  EXPECT_NEAR(c.exponent, 0.25, 1e-15);
  EXPECT_EQ(c.log_power, 1.5);
  EXPECT_EQ(c.mode, RateMode::AlmostSure);
}

TEST(RateAs, DomainViolations) {
  EXPECT_THROW(rate_as(2, 20, 1, Hypothesis::H3, 1.0), Error);
  EXPECT_THROW(rate_as(2, 2, 1, Hypothesis::H3, 1.5), Error);
  EXPECT_THROW(rate_as(2, 20, 1, Hypothesis::H1, 1.5), Error);
}

TEST(RateAs, H2BoundaryAndUpperRegime) {
  // p + d = q/4
  const auto b = rate_as(1, 8, 1, Hypothesis::H2, 1.5);
  EXPECT_NEAR(b.exponent, 0.25, 1e-15);
  EXPECT_EQ(b.log_power, 1.5);
  // p + d > q/4: 2p(q-p)/(q(3p+4d)) = 2*2*4/(6*(6+8))
  EXPECT_NEAR(rate_as(2, 6, 2, Hypothesis::H2, 1.5).exponent, 16.0 / 84.0, 1e-15);
}

TEST(EvalRate, HandValues) {
  RateResult r;
  r.exponent = 0.5;
  EXPECT_DOUBLE_EQ(eval_rate(r, 4.0), 0.5);
  r.log_power = 1.0;
  EXPECT_NEAR(eval_rate(r, std::exp(2.0)), 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(eval_rate(r, std::exp(2.0)), 0.735759, 1e-6);
  r.log_power = 0.0;
  EXPECT_THROW(eval_rate(r, 1.0), Error);
}

TEST(OuCorollary, Table) {
  EXPECT_EQ(ou_corollary(1).exponent, 1.0);
  EXPECT_EQ(ou_corollary(1).log_power, 0.0);
  EXPECT_EQ(ou_corollary(2).exponent, 1.0);
  EXPECT_EQ(ou_corollary(2).log_power, 1.0);
  EXPECT_EQ(ou_corollary(3).exponent, 0.5);
  EXPECT_EQ(ou_corollary(3).log_power, 0.0);
  EXPECT_EQ(ou_corollary(4).exponent, 0.5);
  EXPECT_EQ(ou_corollary(4).log_power, 1.0);
  EXPECT_NEAR(ou_corollary(5).exponent, 0.4, 1e-15);
  EXPECT_NEAR(ou_corollary(8).exponent, 0.25, 1e-15);
}

TEST(LangevinCorollary, Table) {
  EXPECT_EQ(langevin_corollary(2, 1).exponent, 0.5);
  EXPECT_EQ(langevin_corollary(2, 1).log_power, 0.0);
  EXPECT_NEAR(langevin_corollary(1, 1).exponent, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(langevin_corollary(3, 2).exponent, 0.5);
  EXPECT_EQ(langevin_corollary(3, 2).log_power, 1.0);
  // p = 2, n >= 2: 2/(3n)
  EXPECT_NEAR(langevin_corollary(2, 3).exponent, 2.0 / 9.0, 1e-15);
}

TEST(RateProperties, HierarchyH3AboveH2) {
  for (int d = 1; d <= 10; ++d) {
    for (double p : kGrid) {
      for (double q : kGrid) {
        if (q <= p) continue;
        EXPECT_GE(rate_h3(p, q, d).exponent, rate_h2(p, q, d).exponent - 1e-15) << p << ' ' << q << ' ' << d;
      }
    }
  }
}

TEST(RateProperties, MonotoneInQ) {
  for (int d = 1; d <= 10; ++d) {
    for (double p : kGrid) {
      double prev2 = -1.0, prev3 = -1.0;
      for (double q : kGrid) {
        if (q <= p) continue;
        const double e2 = rate_h2(p, q, d).exponent, e3 = rate_h3(p, q, d).exponent;
        EXPECT_GE(e2, prev2 - 1e-15);
        EXPECT_GE(e3, prev3 - 1e-15);
        prev2 = e2;
        prev3 = e3;
      }
    }
  }
}

TEST(RateProperties, H3Saturation) {
  for (int d = 1; d <= 10; ++d) {
    for (double p : kGrid) {
      for (double q : kGrid) {
        if (q <= p) continue;
        const double e = rate_h3(p, q, d).exponent;
        EXPECT_LE(e, 0.5 + 1e-15);
        const bool saturated = p >= d / 2.0 && q >= 2.0 * p;
        EXPECT_EQ(std::abs(e - 0.5) < 1e-12, saturated) << p << ' ' << q << ' ' << d;
      }
    }
  }
}

TEST(RateProperties, H3ContinuousAcrossQEqualsTwoP) {
  for (int d = 1; d <= 6; ++d) {
    for (double p : kGrid) {
      if (p <= d / 2.0) continue;
      EXPECT_NEAR(rate_h3(p, 2.0 * p * (1 - 1e-9), d).exponent, 0.5, 1e-8);
      EXPECT_NEAR(rate_h3(p, 2.0 * p * (1 + 1e-9), d).exponent, 0.5, 1e-8);
    }
  }
}

TEST(RateProperties, OuCorollaryMatchesH3FromDimensionThree) {
  for (int d = 3; d <= 10; ++d) {
    const auto a = ou_corollary(d), b = rate_h3(2, 100, d);
    EXPECT_NEAR(a.exponent, b.exponent, 1e-15) << d;
    EXPECT_EQ(a.log_power, b.log_power) << d;
  }
  // d <= 2 uses a sharper external bound: at least as fast as H3.
  for (int d = 1; d <= 2; ++d) EXPECT_GT(ou_corollary(d).exponent, rate_h3(2, 100, d).exponent);
}

TEST(RateProperties, LangevinCorollaryMatchesH2) {
  for (int n = 1; n <= 4; ++n) {
    for (double p : kGrid) {
      const auto a = langevin_corollary(p, n), b = rate_h2(p, 100, 2 * n);
      EXPECT_NEAR(a.exponent, b.exponent, 1e-12) << p << ' ' << n;
      EXPECT_EQ(a.log_power, b.log_power) << p << ' ' << n;
    }
  }
}

TEST(FormatRational, Representations) {
  EXPECT_EQ(format_rational(0.5), "1/2");
  EXPECT_EQ(format_rational(0.0), "0");
  EXPECT_EQ(format_rational(1.0), "1");
  EXPECT_EQ(format_rational(6.0 / 23.0), "6/23");
  EXPECT_EQ(format_rational(-4.0 / 9.0), "-4/9");
  EXPECT_EQ(format_rational(std::sqrt(2.0)), "1.41421356237");
}

TEST(Hypothesis, ParseRoundTrip) {
  for (auto h : {Hypothesis::H1, Hypothesis::H2, Hypothesis::H3}) EXPECT_EQ(parse_hypothesis(to_string(h)), h);
  EXPECT_THROW(parse_hypothesis("H4"), Error);
}
