#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/parallel.hpp"
#include "ergowass/process.hpp"
#include "ergowass/rng.hpp"

namespace ergowass {

/// Which concentration inequality: iterated Poincare (H2) or L^2-coercivity (H3).
enum class BernsteinVariant { H2, H3 };

struct BernsteinParams {
  double lambda = 1.0;  ///< lambda_I (H2) or lambda_C (H3)
  double M = 1.0;       ///< sup |f|
  double sigma = 1.0;   ///< Var_mu(f) <= sigma^2
  double h_norm = 1.0;  ///< norm of the initial density; 1 for a stationary start
  double q_conj = 2.0;  ///< conjugate Hoelder index, H2 only
  BernsteinVariant variant = BernsteinVariant::H3;
};

namespace detail {
inline void check_params(const BernsteinParams& b) {
  require(b.lambda > 0.0 && b.M > 0.0 && b.sigma > 0.0, ErrorKind::InvalidParameter,
          "lambda, M and sigma must be positive");
  require(b.h_norm >= 1.0, ErrorKind::InvalidParameter, "h_norm must be >= 1");
  if (b.variant == BernsteinVariant::H2) require(b.q_conj > 1.0, ErrorKind::InvalidParameter, "q_conj must be > 1");
}

/// Exponent of the tail bound (non-negative; the bound is 2 h exp(-rate)).
inline double tail_rate(const BernsteinParams& b, double T, double delta) {
  if (b.variant == BernsteinVariant::H2) {
    return b.lambda * T * delta * delta / (4.0 * b.q_conj * b.M * std::sqrt(4.0 * b.sigma * b.sigma + delta * delta));
  }
  const double den = b.sigma + std::sqrt(b.sigma * b.sigma + 2.0 * b.M * delta);
  return b.lambda * T * delta * delta / (den * den);
}
}  // namespace detail

/// P(|T^{-1} int_0^T f(X_t) dt| >= delta) <= 2 h exp(-rate(T, delta)).
/// Returned unclamped; it exceeds 1 when vacuous.
inline double tail_bound(const BernsteinParams& b, double T, double delta) {
  detail::check_params(b);
  require(T > 0.0 && delta > 0.0, ErrorKind::InvalidParameter, "T and delta must be positive");
  return 2.0 * b.h_norm * std::exp(-detail::tail_rate(b, T, delta));
}

/// Bound on E|T^{-1} int_0^T f(X_t) dt| from the layer-cake integral
/// int_0^{2M} min(1, tail_bound(delta)) d delta.
inline double moment_bound(const BernsteinParams& b, double T) {
  detail::check_params(b);
  require(T > 0.0, ErrorKind::InvalidParameter, "T must be positive");
  const double top = 2.0 * b.M;
  auto tail = [&](double delta) { return 2.0 * b.h_norm * std::exp(-detail::tail_rate(b, T, delta)); };
  if (tail(top) >= 1.0) return top;
  // min(1, tail) has a kink where tail = 1, i.e. rate = log(2h).
  const double level = std::log(2.0 * b.h_norm);
  auto g = [&](double delta) { return detail::tail_rate(b, T, delta) - level; };
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(g, 0.0, top, g(0.0), g(top),
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
  const double kink = 0.5 * (lo + hi);
  double err = 0.0;
  const double rest = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(tail, kink, top, 20, 1e-10, &err);
  return kink + rest;
}

// ---------------------------------------------------------------------------
// Monte-Carlo concentration of additive functionals

/// {x : <normal, x> >= offset}
struct HalfSpace {
  std::vector<double> normal;
  double offset = 0.0;
};
/// {x : |x - center| <= radius}
struct Ball {
  std::vector<double> center;
  double radius = 1.0;
};
struct EmptySet {};
using EventSet = std::variant<EmptySet, HalfSpace, Ball>;

inline bool contains(const EventSet& a, std::span<const double> x) {
  if (const auto* h = std::get_if<HalfSpace>(&a)) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += h->normal[i] * x[i];
    return s >= h->offset;
  }
  if (const auto* b = std::get_if<Ball>(&a)) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b->center[i]) * (x[i] - b->center[i]);
    return s <= b->radius * b->radius;
  }
  return false;
}

/// mu(A): closed form for half-spaces under the Gaussian invariant laws,
/// Monte Carlo with `samples` exact invariant draws otherwise.
inline double invariant_probability(const ProcessSpec& spec, const EventSet& a, Rng& rng, std::size_t samples = 1'000'000) {
  if (std::holds_alternative<EmptySet>(a)) return 0.0;
  if (const auto* h = std::get_if<HalfSpace>(&a)) {
    require(h->normal.size() == spec.dim(), ErrorKind::InvalidParameter, "half-space normal has wrong dimension");
    double n2 = 0.0;
    for (double v : h->normal) n2 += v * v;
    require(n2 > 0.0, ErrorKind::InvalidParameter, "half-space normal must be non-zero");
    if (spec.has_exact_invariant()) {
      // Coordinates are i.i.d. N(0, s^2) with s^2 = 1/2 (OU) or 1 (Langevin).
      const double s2 = spec.get_if<OrnsteinUhlenbeck>() ? 0.5 : 1.0;
      return 0.5 * std::erfc(h->offset / std::sqrt(2.0 * s2 * n2));
    }
  }
  if (const auto* b = std::get_if<Ball>(&a)) {
    require(b->center.size() == spec.dim(), ErrorKind::InvalidParameter, "ball center has wrong dimension");
  }
  require(spec.has_exact_invariant(), ErrorKind::UnsupportedSpec, "mu(A) needs an exact invariant sampler");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) hits += contains(a, sample_invariant(spec, rng)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// 95% Wilson score interval for k successes out of n.
struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

inline WilsonInterval wilson95(std::size_t k, std::size_t n) {
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (ph + z * z / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn));
  // The bounds are exactly 0 at k = 0 and 1 at k = n; skip the cancellation.
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

struct TailPoint {
  double delta = 0.0;
  double probability = 0.0;
  WilsonInterval wilson;
};

struct EmpiricalTailConfig {
  double T = 50.0;
  double dt = 0.01;
  std::vector<double> deltas;
  std::size_t replications = 10'000;
  unsigned threads = 1;
};

struct EmpiricalTail {
  double mu_a = 0.0;  ///< mu(A) used for centring
  std::vector<TailPoint> points;
};

/// Fraction of stationary replications with |T^{-1} int_0^T f(X_t) dt| >= delta
/// for f = 1_A - mu(A), the time integral taken as a left Riemann sum.
inline EmpiricalTail empirical_tail(const ProcessSpec& spec, const EventSet& a, const EmpiricalTailConfig& cfg, RngStream stream) {
  require(spec.has_exact_invariant(), ErrorKind::UnsupportedSpec, "empirical_tail needs an exact invariant sampler");
  require(cfg.replications >= 100, ErrorKind::InvalidParameter, "empirical_tail needs >= 100 replications");
  for (double d : cfg.deltas) require(d > 0.0, ErrorKind::InvalidParameter, "deltas must be positive");
  const std::size_t m = step_count(cfg.T, cfg.dt);
  EmpiricalTail out;
  {
    Rng rng(stream.child(0xA11CE));
    out.mu_a = invariant_probability(spec, a, rng);
  }
  std::vector<double> averages(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    Rng rng(stream.child(r));
    auto x = sample_invariant(spec, rng);
    Stepper step(spec);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (contains(a, x)) ++hits;
      if (i + 1 < m) step(x, cfg.dt, rng);
    }
    averages[r] = static_cast<double>(hits) / static_cast<double>(m) - out.mu_a;
  });
  for (double d : cfg.deltas) {
    std::size_t k = 0;
    for (double v : averages) k += std::abs(v) >= d ? 1 : 0;
    out.points.push_back({d, static_cast<double>(k) / static_cast<double>(cfg.replications), wilson95(k, cfg.replications)});
  }
  return out;
}

}  // namespace ergowass
