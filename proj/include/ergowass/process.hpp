#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/rng.hpp"

namespace ergowass {

/// out = F(x). Both spans have the dimension of the process (or of the
/// position block, for Langevin potentials).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
/// out = sigma(x), a d x d matrix stored row-major.
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// dX = -X dt + dW on R^d. Invariant law N(0, I/2).
struct OrnsteinUhlenbeck {
  std::size_t dim = 1;
};

/// dX = (-kappa alpha |X|^{alpha-2} X + grad phi(X)) dt + dW.
struct GradientDiffusion {
  std::size_t dim = 1;
  double kappa = 1.0;
  double alpha = 2.0;
  VectorField phi_grad;  ///< optional, must be bounded
};

/// dX = b(X) dt + sigma(X) dW.
struct GeneralSde {
  std::size_t dim = 1;
  VectorField drift;
  MatrixField diffusion;
};

/// dY = Z dt, dZ = -(Z + grad V(Y)) dt + sqrt(2) dW on R^n x R^n.
/// The state vector is (y, z) of length 2n.
struct UnderdampedLangevin {
  std::size_t n = 1;
  VectorField v_grad;
  /// Set when mu_V is the standard Gaussian (V = |y|^2 / 2), which makes the
  /// invariant law N(0, I_n) x N(0, I_n) exactly samplable.
  bool invariant_is_product_gaussian = false;
};

class ProcessSpec {
 public:
  using Variant = std::variant<OrnsteinUhlenbeck, GradientDiffusion, GeneralSde, UnderdampedLangevin>;

  ProcessSpec(OrnsteinUhlenbeck p) : v_(p) {  // NOLINT(google-explicit-constructor)
    require(p.dim >= 1, ErrorKind::InvalidParameter, "dim must be >= 1");
  }
  ProcessSpec(GradientDiffusion p) : v_(std::move(p)) {  // NOLINT(google-explicit-constructor)
    const auto& g = std::get<GradientDiffusion>(v_);
    require(g.dim >= 1, ErrorKind::InvalidParameter, "dim must be >= 1");
    require(g.kappa > 0.0, ErrorKind::InvalidParameter, "kappa must be > 0");
    require(g.alpha > 1.0, ErrorKind::InvalidParameter, "alpha must be > 1");
  }
  ProcessSpec(GeneralSde p) : v_(std::move(p)) {  // NOLINT(google-explicit-constructor)
    const auto& g = std::get<GeneralSde>(v_);
    require(g.dim >= 1, ErrorKind::InvalidParameter, "dim must be >= 1");
    require(static_cast<bool>(g.drift) && static_cast<bool>(g.diffusion), ErrorKind::InvalidParameter,
            "general SDE needs drift and diffusion");
  }
  ProcessSpec(UnderdampedLangevin p) : v_(std::move(p)) {  // NOLINT(google-explicit-constructor)
    const auto& g = std::get<UnderdampedLangevin>(v_);
    require(g.n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
    require(static_cast<bool>(g.v_grad), ErrorKind::InvalidParameter, "Langevin needs grad V");
  }

  /// Quadratic potential V(y) = |y|^2 / 2.
  static ProcessSpec langevin_quadratic(std::size_t n) {
    return UnderdampedLangevin{n, [](std::span<const double> y, std::span<double> out) {
                                 for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i];
                               },
                               true};
  }

  /// State dimension (2n for Langevin).
  std::size_t dim() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, UnderdampedLangevin>) {
            return 2 * p.n;
          } else {
            return p.dim;
          }
        },
        v_);
  }

  std::string name() const {
    switch (v_.index()) {
      case 0: return "ou";
      case 1: return "gradient";
      case 2: return "general";
      default: return "langevin";
    }
  }

  const Variant& variant() const noexcept { return v_; }
  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  bool has_exact_invariant() const {
    if (get_if<OrnsteinUhlenbeck>()) return true;
    if (const auto* l = get_if<UnderdampedLangevin>()) return l->invariant_is_product_gaussian;
    return false;
  }

 private:
  Variant v_;
};

/// Discretised path on a uniform time grid t_i = t0 + i dt.
class Trajectory {
 public:
  Trajectory(std::size_t dim, double t0, double dt) : dim_(dim), t0_(t0), dt_(dt) {
    require(t0 >= 0.0, ErrorKind::InvalidParameter, "t0 must be >= 0");
    require(dt > 0.0, ErrorKind::InvalidParameter, "dt must be > 0");
  }

  void push(std::span<const double> x) { states_.insert(states_.end(), x.begin(), x.end()); }
  void reserve(std::size_t m) { states_.reserve(m * dim_); }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return states_.size() / dim_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }
  std::span<const double> state(std::size_t i) const { return {states_.data() + i * dim_, dim_}; }

  /// Uniform measure on the first m states.
  EmpiricalMeasure prefix_measure(std::size_t m) const {
    require(m >= 1 && m <= size(), ErrorKind::InvalidParameter, "prefix length out of range");
    return EmpiricalMeasure::uniform(dim_, std::vector<double>(states_.begin(), states_.begin() + static_cast<std::ptrdiff_t>(m * dim_)));
  }

 private:
  std::size_t dim_;
  double t0_, dt_;
  std::vector<double> states_;
};

namespace detail {
inline void check_finite(std::span<const double> v, std::span<const double> state, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::NumericOverflow, std::string(what) + " is not finite at state " + format_point(state));
  }
}
}  // namespace detail

/// Exact transition of dX = -X dt + dW over time dt:
/// e^{-dt} x + sqrt((1 - e^{-2dt}) / 2) g.
inline void exact_ou_step(std::span<double> x, double dt, Rng& rng) {
  require(dt > 0.0, ErrorKind::InvalidParameter, "dt must be > 0");
  const double a = std::exp(-dt);
  const double s = std::sqrt(-std::expm1(-2.0 * dt) / 2.0);
  for (auto& v : x) v = a * v + s * rng.normal();
}

inline std::vector<double> exact_ou_step(std::span<const double> x, double dt, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  exact_ou_step(std::span<double>(out), dt, rng);
  return out;
}

/// Drift of the gradient diffusion, b(x) = -kappa alpha |x|^{alpha-2} x + grad phi(x).
inline void gradient_drift(const GradientDiffusion& g, std::span<const double> x, std::span<double> out) {
  const double r = detail::norm(x);
  const double scale = r == 0.0 ? 0.0 : -g.kappa * g.alpha * std::pow(r, g.alpha - 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
  if (g.phi_grad) {
    std::vector<double> extra(x.size());
    g.phi_grad(x, extra);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += extra[i];
  }
}

/// Reusable buffers for Euler-Maruyama steps.
struct EulerScratch {
  std::vector<double> drift, sigma, noise;
};

/// One Euler-Maruyama step x <- x + b(x) dt + sigma(x) sqrt(dt) g, in place.
inline void euler_step(const ProcessSpec& spec, std::span<double> x, double dt, Rng& rng, EulerScratch& s) {
  require(dt > 0.0, ErrorKind::InvalidParameter, "dt must be > 0");
  const std::size_t d = x.size();
  require(d == spec.dim(), ErrorKind::InvalidParameter, "state dimension mismatch");
  s.drift.resize(d);
  s.noise.resize(d);
  const double sq = std::sqrt(dt);
  if (const auto* g = spec.get_if<GradientDiffusion>()) {
    gradient_drift(*g, x, s.drift);
    detail::check_finite(s.drift, x, "drift");
    for (std::size_t i = 0; i < d; ++i) s.noise[i] = sq * rng.normal();
  } else if (const auto* g = spec.get_if<GeneralSde>()) {
    g->drift(x, s.drift);
    detail::check_finite(s.drift, x, "drift");
    s.sigma.resize(d * d);
    g->diffusion(x, s.sigma);
    detail::check_finite(s.sigma, x, "diffusion");
    std::vector<double> gauss(d);
    for (auto& v : gauss) v = rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += s.sigma[i * d + j] * gauss[j];
      s.noise[i] = sq * acc;
    }
  } else {
    fail(ErrorKind::UnsupportedSpec, "euler_step needs a gradient diffusion or general SDE, got " + spec.name());
  }
  for (std::size_t i = 0; i < d; ++i) x[i] += s.drift[i] * dt + s.noise[i];
  detail::check_finite(x, x, "state");
}

inline std::vector<double> euler_step(const ProcessSpec& spec, std::span<const double> x, double dt, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  EulerScratch s;
  euler_step(spec, std::span<double>(out), dt, rng, s);
  return out;
}

/// One splitting step for the underdamped Langevin dynamics on state (y, z):
/// half kick, half drift, exact OU substep of z over dt, half drift, half kick.
/// With grad V = 0 the z-marginal N(0, I_n) is preserved exactly.
inline void langevin_step(const ProcessSpec& spec, std::span<double> state, double dt, Rng& rng, std::vector<double>& grad) {
  const auto* l = spec.get_if<UnderdampedLangevin>();
  require(l != nullptr, ErrorKind::UnsupportedSpec, "langevin_step needs an underdamped Langevin spec, got " + spec.name());
  require(dt > 0.0, ErrorKind::InvalidParameter, "dt must be > 0");
  const std::size_t n = l->n;
  require(state.size() == 2 * n, ErrorKind::InvalidParameter, "Langevin state must have dimension 2n");
  auto y = state.first(n);
  auto z = state.last(n);
  grad.resize(n);
  auto kick = [&] {
    l->v_grad(y, grad);
    detail::check_finite(grad, state, "grad V");
    for (std::size_t i = 0; i < n; ++i) z[i] -= grad[i] * dt / 2.0;
  };
  kick();
  for (std::size_t i = 0; i < n; ++i) y[i] += z[i] * dt / 2.0;
  const double a = std::exp(-dt);
  const double s = std::sqrt(-std::expm1(-2.0 * dt));
  for (std::size_t i = 0; i < n; ++i) z[i] = a * z[i] + s * rng.normal();
  for (std::size_t i = 0; i < n; ++i) y[i] += z[i] * dt / 2.0;
  kick();
}

inline std::vector<double> langevin_step(const ProcessSpec& spec, std::span<const double> state, double dt, Rng& rng) {
  std::vector<double> out(state.begin(), state.end());
  std::vector<double> grad;
  langevin_step(spec, std::span<double>(out), dt, rng, grad);
  return out;
}

/// Advances x by one step of size dt with the integrator matching the spec.
class Stepper {
 public:
  explicit Stepper(const ProcessSpec& spec) : spec_(spec) {}

  void operator()(std::span<double> x, double dt, Rng& rng) {
    if (spec_.get_if<OrnsteinUhlenbeck>()) {
      exact_ou_step(x, dt, rng);
    } else if (spec_.get_if<UnderdampedLangevin>()) {
      langevin_step(spec_, x, dt, rng, grad_);
    } else {
      euler_step(spec_, x, dt, rng, scratch_);
    }
  }

 private:
  const ProcessSpec& spec_;
  EulerScratch scratch_;
  std::vector<double> grad_;
};

inline constexpr double kDefaultBurnIn = 20.0;

/// Approximate invariant sampling: run the dynamics from `start` (origin by
/// default) for `time` with step `dt`.
struct BurnIn {
  double dt = 0.01;
  double time = kDefaultBurnIn;
  std::vector<double> start;
};

/// One draw from the invariant law: exact for OU (N(0, I/2)) and for
/// Langevin with a product-Gaussian invariant law; otherwise the state after
/// burn-in, which is only approximately invariant.
inline std::vector<double> sample_invariant(const ProcessSpec& spec, Rng& rng, const std::optional<BurnIn>& burn = std::nullopt) {
  const std::size_t d = spec.dim();
  std::vector<double> x(d);
  if (spec.get_if<OrnsteinUhlenbeck>()) {
    const double s = std::sqrt(0.5);
    for (auto& v : x) v = s * rng.normal();
    return x;
  }
  if (const auto* l = spec.get_if<UnderdampedLangevin>(); l && l->invariant_is_product_gaussian) {
    for (auto& v : x) v = rng.normal();
    return x;
  }
  require(burn.has_value(), ErrorKind::UnsupportedSpec,
          "no exact invariant sampler for " + spec.name() + " and no burn-in configured");
  require(burn->dt > 0.0 && burn->time > 0.0, ErrorKind::InvalidParameter, "burn-in dt and time must be > 0");
  if (!burn->start.empty()) {
    require(burn->start.size() == d, ErrorKind::InvalidParameter, "burn-in start has wrong dimension");
    x = burn->start;
  }
  Stepper step(spec);
  const auto steps = static_cast<std::size_t>(std::ceil(burn->time / burn->dt - 1e-9));
  for (std::size_t i = 0; i < steps; ++i) step(x, burn->dt, rng);
  return x;
}

/// Number of grid steps M = T / dt; T must be an integer multiple of dt.
inline std::size_t step_count(double T, double dt) {
  require(dt > 0.0, ErrorKind::InvalidParameter, "dt must be > 0");
  require(T >= dt * (1.0 - 1e-12), ErrorKind::InvalidParameter, "T must be >= dt");
  const double m = T / dt;
  const double r = std::round(m);
  require(std::abs(m - r) <= 1e-9 * std::max(1.0, r), ErrorKind::InvalidParameter,
          "T / dt must be an integer (T=" + std::to_string(T) + ", dt=" + std::to_string(dt) + ")");
  return static_cast<std::size_t>(r);
}

/// Path X_0, X_dt, ..., X_{(M-1)dt} started from x0.
inline Trajectory simulate_path(const ProcessSpec& spec, std::size_t steps, double dt, std::vector<double> x0, Rng& rng) {
  require(x0.size() == spec.dim(), ErrorKind::InvalidParameter, "initial state has wrong dimension");
  Trajectory path(spec.dim(), 0.0, dt);
  path.reserve(steps);
  Stepper step(spec);
  for (std::size_t i = 0; i < steps; ++i) {
    path.push(x0);
    if (i + 1 < steps) step(x0, dt, rng);
  }
  return path;
}

/// Initial condition: a fixed point, or a draw from the invariant law.
struct InvariantStart {
  std::optional<BurnIn> burn_in;
};
using Initial = std::variant<std::vector<double>, InvariantStart>;

/// Riemann approximation of mu_T = T^{-1} int_0^T delta_{X_t} dt: the uniform
/// measure on the M = T/dt left-endpoint states.
inline EmpiricalMeasure simulate_empirical(const ProcessSpec& spec, double T, double dt, const Initial& init, Rng& rng) {
  const std::size_t m = step_count(T, dt);
  std::vector<double> x0;
  if (const auto* p = std::get_if<std::vector<double>>(&init)) {
    x0 = *p;
  } else {
    x0 = sample_invariant(spec, rng, std::get<InvariantStart>(init).burn_in);
  }
  return simulate_path(spec, m, dt, std::move(x0), rng).prefix_measure(m);
}

}  // namespace ergowass
