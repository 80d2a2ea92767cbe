#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ergowass/measure.hpp"
#include "ergowass/transport.hpp"

using namespace ergowass;

namespace {
EmpiricalMeasure gaussian_cloud(std::size_t n, std::size_t d, double sd, std::uint64_t seed) {
  Rng rng(RngStream{seed, 1});
  std::vector<double> c(n * d);
  for (auto& v : c) v = sd * rng.normal();
  return EmpiricalMeasure::uniform(d, std::move(c));
}
}  // namespace

TEST(EmpiricalMeasure, Validation) {
  EXPECT_THROW(EmpiricalMeasure(1, {0.0, 1.0}, {0.5, 0.4}), Error);
  EXPECT_THROW(EmpiricalMeasure(1, {0.0, 1.0}, {1.5, -0.5}), Error);
  EXPECT_THROW(EmpiricalMeasure(1, {}, {}), Error);
  EXPECT_THROW(EmpiricalMeasure(2, {0.0, 1.0, 2.0}, {1.0}), Error);
  EXPECT_THROW(EmpiricalMeasure(1, {NAN}, {1.0}), Error);
  EXPECT_NO_THROW(EmpiricalMeasure(1, {0.0, 1.0, 2.0}, {0.1, 0.2, 0.7}));
  const auto u = EmpiricalMeasure::uniform(2, {0, 0, 1, 1, 2, 2});
  EXPECT_EQ(u.size(), 3u);
  EXPECT_TRUE(u.is_uniform());
  EXPECT_FALSE(EmpiricalMeasure(1, {0.0, 1.0}, {0.25, 0.75}).is_uniform());
}

TEST(Moment, HandValues) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(moment(EmpiricalMeasure::dirac(zero), 3.0), 0.0);
  EXPECT_DOUBLE_EQ(moment(EmpiricalMeasure::uniform(1, {1.0, -1.0}), 2.0), 1.0);
  EXPECT_THROW(moment(EmpiricalMeasure::dirac(zero), 0.0), Error);
}

TEST(Moment, GaussianSecondMoment) {
  EXPECT_NEAR(moment(gaussian_cloud(100000, 1, 1.0, 7), 2.0), 1.0, 0.02);
}

TEST(ShellOf, Examples) {
  EXPECT_EQ(shell_of(std::vector<double>{0.5, -0.2}), 0);
  EXPECT_EQ(shell_of(std::vector<double>{3.0, 0.0}), 2);
  EXPECT_EQ(shell_of(std::vector<double>{1.0, 1.0}), 0);
  EXPECT_EQ(shell_of(std::vector<double>{1.0 + 1e-9, 0.0}), 1);
  EXPECT_EQ(shell_of(std::vector<double>{-1.0}), 1);  // -1 is outside (-1, 1]
  EXPECT_EQ(shell_of(std::vector<double>{2.0}), 1);
  EXPECT_EQ(shell_of(std::vector<double>{-2.0}), 2);
  EXPECT_EQ(shell_of(std::vector<double>{1e-300}), 0);
}

TEST(ShellOf, MatchesBoxDefinition) {
  // Oracle: smallest n with x in (-2^n, 2^n]^d.
  Rng rng(RngStream{3, 3});
  for (int t = 0; t < 20000; ++t) {
    std::vector<double> x(3);
    for (auto& v : x) v = std::ldexp(rng.normal(), static_cast<int>(rng.below(12)) - 4);
    if (t % 7 == 0) x[0] = std::ldexp(1.0, static_cast<int>(rng.below(8))) * (rng.below(2) ? 1.0 : -1.0);
    int n = 0;
    for (;; ++n) {
      const double b = std::ldexp(1.0, n);
      bool in = true;
      for (double v : x) in = in && (-b < v && v <= b);
      if (in) break;
    }
    EXPECT_EQ(shell_of(x), n);
  }
}

TEST(ShellMass, PartitionAndMarkov) {
  const std::vector<double> zero{0.0};
  EXPECT_EQ(shell_mass(EmpiricalMeasure::dirac(zero), 0), 1.0);
  EXPECT_EQ(shell_mass(EmpiricalMeasure::dirac(zero), 1), 0.0);

  const auto nu = gaussian_cloud(100000, 1, std::sqrt(0.5), 11);
  double total = 0.0;
  for (int n = 0; n <= 10; ++n) total += shell_mass(nu, n);
  EXPECT_NEAR(total, 1.0, 1e-12);
  const double m2 = moment(nu, 2.0);
  for (int n = 1; n <= 6; ++n) EXPECT_LE(shell_mass(nu, n) * std::ldexp(1.0, 2 * n), 4.0 * m2);
}

TEST(Mollify, SupportAndWeights) {
  const auto nu = gaussian_cloud(2000, 3, 1.0, 5);
  for (auto kind : {MollifierKind::UniformBall, MollifierKind::SmoothBump}) {
    Rng rng(RngStream{9, static_cast<std::uint64_t>(kind)});
    const double eps = 0.3;
    const auto out = mollify(nu, {eps, kind}, rng);
    ASSERT_EQ(out.size(), nu.size());
    EXPECT_EQ(out.weights(), nu.weights());
    for (std::size_t i = 0; i < nu.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += std::pow(out.point(i)[k] - nu.point(i)[k], 2);
      EXPECT_LE(std::sqrt(s), eps * (1.0 + 1e-12));
    }
  }
}

TEST(Mollify, VanishingEpsilon) {
  const auto nu = gaussian_cloud(500, 2, 1.0, 6);
  Rng rng(RngStream{1, 1});
  const auto out = mollify(nu, {1e-12, MollifierKind::UniformBall}, rng);
  for (std::size_t i = 0; i < nu.coords().size(); ++i) EXPECT_NEAR(out.coords()[i], nu.coords()[i], 1e-11);
}

TEST(Mollify, RejectsEpsilonOutsideUnitInterval) {
  const auto nu = gaussian_cloud(5, 1, 1.0, 1);
  Rng rng(RngStream{1, 1});
  EXPECT_THROW(mollify(nu, {0.0, MollifierKind::UniformBall}, rng), Error);
  EXPECT_THROW(mollify(nu, {1.0, MollifierKind::UniformBall}, rng), Error);
}

TEST(Mollify, TransportCostAtMostEpsilonToThePower) {
  const auto nu = gaussian_cloud(200, 2, 1.0, 8);
  Rng rng(RngStream{2, 2});
  const double eps = 0.2;
  const auto out = mollify(nu, {eps, MollifierKind::UniformBall}, rng);
  for (double p : {1.0, 2.0, 3.0}) EXPECT_LE(tp_exact(nu, out, p).cost, std::pow(eps, p) + 1e-12);
}

TEST(UnitBall, UniformRadiusLaw) {
  // P(|xi| <= r) = r^d for the uniform ball.
  Rng rng(RngStream{4, 4});
  const int n = 100000;
  int inside = 0;
  std::vector<double> xi(3);
  for (int i = 0; i < n; ++i) {
    sample_unit_ball(MollifierKind::UniformBall, rng, xi);
    if (std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) <= 0.5) ++inside;
  }
  const double p = 0.125, se = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(inside) / n, p, 4 * se);
}

TEST(Csv, RoundTripIsExact) {
  const EmpiricalMeasure nu(2, {0.1, -1.0 / 3.0, 1e-300, 2.5e10}, {1.0 / 3.0, 2.0 / 3.0});
  std::stringstream ss;
  write_csv(ss, nu);
  EXPECT_EQ(ss.str().substr(0, 8), "w,x1,x2\n");
  EXPECT_EQ(read_csv(ss), nu);
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream a("w,x1\n0.5,1\n0.5,abc\n");
  EXPECT_THROW(read_csv(a), Error);
  std::stringstream b("w,y1\n1,1\n");
  EXPECT_THROW(read_csv(b), Error);
  std::stringstream c("w,x1\n0.5,1\n0.4,2\n");
  EXPECT_THROW(read_csv(c), Error);
  std::stringstream d("w,x1,x2\n1,1\n");
  EXPECT_THROW(read_csv(d), Error);
}
