#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "ergowass/error.hpp"

namespace ergowass {

enum class Hypothesis { H1, H2, H3 };
enum class RateMode { Expectation, AlmostSure };

constexpr std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::H1: return "H1";
    case Hypothesis::H2: return "H2";
    case Hypothesis::H3: return "H3";
  }
  return "H3";
}

inline Hypothesis parse_hypothesis(std::string_view s) {
  if (s == "H1") return Hypothesis::H1;
  if (s == "H2") return Hypothesis::H2;
  if (s == "H3") return Hypothesis::H3;
  fail(ErrorKind::InvalidQuery, "unknown hypothesis '" + std::string(s) + "' (expected H1, H2 or H3)");
}

/// Bound of the form T^{-exponent} (log T)^{log_power}.
struct RateResult {
  double exponent = 0.0;
  double log_power = 0.0;
  Hypothesis hypothesis = Hypothesis::H3;
  RateMode mode = RateMode::Expectation;
  /// Auxiliary quantity of the formula: zeta (H1), gamma_1 (H2), gamma_2 (H3).
  std::optional<double> derived;
  std::string_view derived_name;
};

namespace detail {
/// Boundary predicate for the log-factor indicators.
inline bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

inline void check_pqd(double p, double q, int d) {
  require(p > 0.0 && std::isfinite(p), ErrorKind::InvalidQuery, "p must be positive");
  require(q > 0.0 && std::isfinite(q), ErrorKind::InvalidQuery, "q must be positive");
  require(d >= 1, ErrorKind::InvalidQuery, "d must be >= 1");
}
}  // namespace detail

/// Expectation rate under exponential W_1-contractivity; needs q > max{p, 1}.
inline RateResult rate_h1(double p, double q, int d) {
  detail::check_pqd(p, q, d);
  require(q > std::max(p, 1.0), ErrorKind::InvalidQuery, "H1 needs q > max{p, 1}");
  const double dd = d;
  const double zeta = std::max(q / (q - p), dd / p);
  RateResult r;
  r.hypothesis = Hypothesis::H1;
  r.exponent = p / (2.0 * zeta * p + 1.0);
  if (dd > p && detail::same(q, dd * p / (dd - p))) r.log_power += 2.0 * dd / (2.0 * dd + 1.0);
  if (detail::same(p, dd)) r.log_power += 2.0 * q / (2.0 * q + q / dd - 1.0);
  r.derived = zeta;
  r.derived_name = "zeta";
  return r;
}

/// Expectation rate under the iterated Poincare inequality; needs q > p.
inline RateResult rate_h2(double p, double q, int d) {
  detail::check_pqd(p, q, d);
  require(q > p, ErrorKind::InvalidQuery, "H2 needs q > p");
  const double dd = d;
  const double gamma1 = std::max(0.25, 1.0 - p / dd);
  RateResult r;
  r.hypothesis = Hypothesis::H2;
  r.exponent = (2.0 / 3.0) * (1.0 - std::max(gamma1, p / q));
  if (detail::same(gamma1 * q, p)) r.log_power += 1.0;
  if (detail::same(p, 0.75 * dd)) r.log_power += 1.0;
  r.derived = gamma1;
  r.derived_name = "gamma1";
  return r;
}

/// Expectation rate under L^2-coercivity; needs q > p.
inline RateResult rate_h3(double p, double q, int d) {
  detail::check_pqd(p, q, d);
  require(q > p, ErrorKind::InvalidQuery, "H3 needs q > p");
  const double dd = d;
  const double gamma2 = std::max(0.5, 1.0 - p / dd);
  RateResult r;
  r.hypothesis = Hypothesis::H3;
  r.exponent = 1.0 - std::max(gamma2, p / q);
  if (detail::same(gamma2 * q, p)) r.log_power += 1.0;
  if (detail::same(p, 0.5 * dd)) r.log_power += 1.0;
  r.derived = gamma2;
  r.derived_name = "gamma2";
  return r;
}

inline RateResult rate_expectation(Hypothesis h, double p, double q, int d) {
  switch (h) {
    case Hypothesis::H1: return rate_h1(p, q, d);
    case Hypothesis::H2: return rate_h2(p, q, d);
    case Hypothesis::H3: return rate_h3(p, q, d);
  }
  return rate_h3(p, q, d);
}

/// Almost-sure envelope R_eta (H2) or its H3 counterpart.
inline RateResult rate_as(double p, double q, int d, Hypothesis h, double eta) {
  detail::check_pqd(p, q, d);
  require(q > p, ErrorKind::InvalidQuery, "almost-sure rates need q > p");
  require(eta > 1.0, ErrorKind::InvalidQuery, "eta must be > 1");
  require(h != Hypothesis::H1, ErrorKind::InvalidQuery, "almost-sure rates are stated under H2 or H3");
  const double dd = d;
  const double threshold = h == Hypothesis::H2 ? q / 4.0 : q / 2.0;
  RateResult r;
  r.hypothesis = h;
  r.mode = RateMode::AlmostSure;
  if (detail::same(p + dd, threshold)) {
    r.exponent = h == Hypothesis::H2 ? 2.0 * p / q : p / q;
    r.log_power = 1.5;
  } else if (p + dd < threshold) {
    r.exponent = p / (2.0 * (p + dd));
    r.log_power = eta;
  } else {
    r.exponent = h == Hypothesis::H2 ? 2.0 * p * (q - p) / (q * (3.0 * p + 4.0 * dd))
                                     : p * (q - p) / (q * (p + 2.0 * dd));
    r.log_power = eta;
  }
  return r;
}

/// T^{-exponent} (log T)^{log_power}, natural log, for T >= 2.
inline double eval_rate(const RateResult& r, double T) {
  require(T >= 2.0, ErrorKind::InvalidParameter, "rates are stated for T >= 2");
  return std::pow(T, -r.exponent) * std::pow(std::log(T), r.log_power);
}

/// E T_2(mu_T, mu) for the d-dimensional OU process dX = -X dt + dW.
inline RateResult ou_corollary(int d) {
  require(d >= 1, ErrorKind::InvalidQuery, "d must be >= 1");
  RateResult r;
  r.hypothesis = Hypothesis::H3;
  switch (d) {
    case 1: r.exponent = 1.0; break;
    case 2: r.exponent = 1.0; r.log_power = 1.0; break;
    case 3: r.exponent = 0.5; break;
    case 4: r.exponent = 0.5; r.log_power = 1.0; break;
    default: r.exponent = 2.0 / d; break;
  }
  return r;
}

/// E T_p(mu_T, mu) for underdamped Langevin dynamics on R^n x R^n.
inline RateResult langevin_corollary(double p, int n) {
  require(p > 0.0, ErrorKind::InvalidQuery, "p must be positive");
  require(n >= 1, ErrorKind::InvalidQuery, "n must be >= 1");
  RateResult r;
  r.hypothesis = Hypothesis::H2;
  const double edge = 1.5 * n;
  if (detail::same(p, edge)) {
    r.exponent = 0.5;
    r.log_power = 1.0;
  } else if (p > edge) {
    r.exponent = 0.5;
  } else {
    r.exponent = p / (3.0 * n);
  }
  return r;
}

/// "a/b" when x is a rational with denominator <= 1000, else 12 significant digits.
inline std::string format_rational(double x) {
  if (std::isfinite(x)) {
    for (std::int64_t den = 1; den <= 1000; ++den) {
      const double num = std::round(x * static_cast<double>(den));
      if (std::abs(num / static_cast<double>(den) - x) <= 1e-12 * std::max(1.0, std::abs(x))) {
        const auto n = static_cast<std::int64_t>(num);
        if (std::gcd(n, den) != 1) continue;
        return den == 1 ? std::to_string(n) : std::to_string(n) + "/" + std::to_string(den);
      }
    }
  }
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

}  // namespace ergowass
