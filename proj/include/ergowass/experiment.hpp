#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/parallel.hpp"
#include "ergowass/process.hpp"
#include "ergowass/rates.hpp"
#include "ergowass/rng.hpp"
#include "ergowass/transport.hpp"

namespace ergowass {

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr std::uint64_t kReferenceStream = 0x7265666572656e63ULL;
inline constexpr std::size_t kReferenceFactor = 8;

struct ExperimentConfig {
  ProcessSpec process{OrnsteinUhlenbeck{1}};
  double p = 2.0;
  std::vector<double> T_grid;
  double dt = 0.05;
  std::size_t replications = 10;
  /// Atoms of the invariant reference sample; 0 picks 8x the largest
  /// estimator input.
  std::size_t reference_size = 0;
  EstimatorSpec estimator;
  std::uint64_t seed = kDefaultSeed;
  Hypothesis hypothesis = Hypothesis::H3;
  double q = 100.0;
  /// Used when the process has no exact invariant sampler.
  std::optional<BurnIn> burn_in;
  unsigned threads = 1;
};

struct ExperimentRecord {
  double T = 0.0;
  std::size_t replicate = 0;
  double tp_estimate = 0.0;
  double seconds = 0.0;
};

struct MeanRow {
  double T = 0.0;
  double mean = 0.0;
  double stdev = 0.0;  ///< sample standard deviation over replicates
  std::size_t n = 0;
  std::vector<ExperimentRecord> records;

  double standard_error() const { return n > 0 ? stdev / std::sqrt(static_cast<double>(n)) : 0.0; }
};

struct ExperimentResult {
  std::vector<MeanRow> rows;
  Method method_used = Method::Auto;
  std::size_t reference_size = 0;
  bool approximate_start = false;  ///< burn-in rather than exact invariant start
};

namespace detail {
/// Method the estimator settles on for measures of up to m atoms, and the
/// largest input it then feeds to an exact solver.
inline std::pair<Method, std::size_t> plan_estimator(const EstimatorSpec& e, std::size_t dim, double p, std::size_t m) {
  Method method = e.method;
  if (method == Method::Auto) {
    // Against a reference of 8x the atoms the exact solver would run on
    // unequal sizes, which is far slower than matched subsamples.
    method = dim == 1 && p >= 1.0 ? Method::OneD : Method::SubsampledExact;
  }
  const std::size_t used = method == Method::SubsampledExact ? std::min(e.k, m) : m;
  return {method, used};
}

inline void validate(const ExperimentConfig& cfg, const std::vector<double>& grid) {
  require(cfg.p > 0.0, ErrorKind::InvalidParameter, "p must be positive");
  require(cfg.replications >= 1, ErrorKind::InvalidParameter, "replications must be >= 1");
  require(!grid.empty(), ErrorKind::InvalidParameter, "T grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 2.0, ErrorKind::InvalidParameter, "every T must be >= 2");
    if (i > 0) require(grid[i] > grid[i - 1], ErrorKind::InvalidParameter, "T grid must be increasing");
    step_count(grid[i], cfg.dt);
  }
  if (!cfg.process.has_exact_invariant()) {
    require(cfg.burn_in.has_value(), ErrorKind::UnsupportedSpec,
            "process " + cfg.process.name() + " has no exact invariant sampler; configure burn_in");
  }
}

struct PreparedReference {
  Method method;
  std::size_t size;
  EmpiricalMeasure measure;
};

inline PreparedReference prepare_reference(const ExperimentConfig& cfg, double t_max) {
  const std::size_t m = step_count(t_max, cfg.dt);
  const auto [method, used] = plan_estimator(cfg.estimator, cfg.process.dim(), cfg.p, m);
  std::size_t size = cfg.reference_size == 0 ? kReferenceFactor * used : cfg.reference_size;
  require(size >= 4 * used, ErrorKind::InvalidParameter,
          "reference_size " + std::to_string(size) + " must be >= 4 x " + std::to_string(used));
  Rng rng(RngStream{cfg.seed, kReferenceStream});
  std::vector<double> coords;
  coords.reserve(size * cfg.process.dim());
  for (std::size_t i = 0; i < size; ++i) {
    const auto x = sample_invariant(cfg.process, rng, cfg.burn_in);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return {method, size, EmpiricalMeasure::uniform(cfg.process.dim(), std::move(coords))};
}

inline EstimatorSpec resolved_spec(const EstimatorSpec& e, Method m) {
  EstimatorSpec s = e;
  s.method = m;
  return s;
}

inline std::string identify(double T, std::size_t rep, std::uint64_t seed) {
  std::ostringstream os;
  os << "T=" << T << ", replicate=" << rep << ", seed=" << seed;
  return os.str();
}
}  // namespace detail

/// For every T and replicate: stationary start, mu_T by simulation, and an
/// estimate of T_p(mu_T, mu_hat) against one shared invariant reference
/// sample. Rows are ordered by T, records by replicate.
inline ExperimentResult run_mean_experiment(const ExperimentConfig& cfg) {
  detail::validate(cfg, cfg.T_grid);
  auto ref = detail::prepare_reference(cfg, cfg.T_grid.back());
  const ReferenceEstimator est(std::move(ref.measure), cfg.p, detail::resolved_spec(cfg.estimator, ref.method));

  const std::size_t reps = cfg.replications;
  const std::size_t tasks = cfg.T_grid.size() * reps;
  std::vector<ExperimentRecord> records(tasks);
  const InvariantStart start{cfg.burn_in};
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t ti = task / reps, rep = task % reps;
    const double T = cfg.T_grid[ti];
    const RngStream base = RngStream{cfg.seed, 0}.child((static_cast<std::uint64_t>(ti) << 32) | rep);
    const auto t0 = std::chrono::steady_clock::now();
    Rng sim_rng(base.child(1));
    const auto mu_t = simulate_empirical(cfg.process, T, cfg.dt, start, sim_rng);
    Rng est_rng(base.child(2));
    const double v = est.estimate(mu_t, est_rng).value;
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorKind::NumericOverflow, "non-finite transport estimate at " + detail::identify(T, rep, cfg.seed));
    }
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t0;
    records[task] = {T, rep, v, el.count()};
  });

  ExperimentResult out;
  out.method_used = ref.method;
  out.reference_size = ref.size;
  out.approximate_start = !cfg.process.has_exact_invariant();
  for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti) {
    MeanRow row;
    row.T = cfg.T_grid[ti];
    row.records.assign(records.begin() + static_cast<std::ptrdiff_t>(ti * reps),
                       records.begin() + static_cast<std::ptrdiff_t>((ti + 1) * reps));
    row.n = reps;
    double s = 0.0;
    for (const auto& r : row.records) s += r.tp_estimate;
    row.mean = s / static_cast<double>(reps);
    double ss = 0.0;
    for (const auto& r : row.records) ss += (r.tp_estimate - row.mean) * (r.tp_estimate - row.mean);
    row.stdev = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// OLS fit of log(mean) against log(T).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double std_error = 0.0;
};

inline SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 3, ErrorKind::InvalidData, "a log-log fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [t, v] : points) {
    require(t > 0.0 && v > 0.0 && std::isfinite(v), ErrorKind::InvalidData, "log-log fit needs positive values");
    mx += std::log(t);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [t, v] : points) {
    const double dx = std::log(t) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorKind::InvalidData, "log-log fit needs distinct T values");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  f.std_error = points.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

inline SlopeFit fit_rows(const std::vector<MeanRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.T, r.mean);
  return fit_loglog(pts);
}

enum class VerdictKind { PassTwoSided, PassOneSided, Fail };

constexpr std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::PassTwoSided: return "pass-two-sided";
    case VerdictKind::PassOneSided: return "pass-one-sided";
    case VerdictKind::Fail: return "fail";
  }
  return "fail";
}

struct Verdict {
  VerdictKind kind = VerdictKind::Fail;
  std::string report;
};

/// The theorems are upper bounds, so decaying faster than the theory
/// exponent passes one-sided; agreement within tol on both sides passes
/// two-sided.
inline Verdict compare_to_theory(const SlopeFit& fit, const RateResult& theory, double tol) {
  const double target = -theory.exponent;
  Verdict v;
  if (fit.slope > target + tol) {
    v.kind = VerdictKind::Fail;
  } else if (fit.slope >= target - tol) {
    v.kind = VerdictKind::PassTwoSided;
  } else {
    v.kind = VerdictKind::PassOneSided;
  }
  std::ostringstream os;
  os << std::setprecision(4) << "slope " << fit.slope << " (se " << fit.std_error << ", r2 " << fit.r2
     << ") vs theory -" << theory.exponent << " log^" << theory.log_power << " tol " << tol << ": "
     << to_string(v.kind);
  v.report = os.str();
  return v;
}

struct AsRow {
  double T = 0.0;
  double tp_estimate = 0.0;
  double envelope = 0.0;  ///< R_eta(T)
  double ratio = 0.0;
};

struct AsResult {
  RateResult rate;
  std::vector<AsRow> rows;
  double final_half_max = 0.0;   ///< running max of the ratio over the last half of checkpoints
  double middle_third_max = 0.0;  ///< max over the middle third

  bool bounded(double factor) const { return final_half_max <= factor * middle_third_max; }
};

/// Follows ONE stationary path and compares T_p(mu_T, mu_hat) at each
/// checkpoint with the almost-sure envelope for cfg.hypothesis.
inline AsResult run_as_experiment(const ExperimentConfig& cfg, double eta, const std::vector<double>& checkpoints) {
  detail::validate(cfg, checkpoints);
  require(checkpoints.size() >= 3, ErrorKind::InvalidParameter, "need at least 3 checkpoints");
  AsResult out;
  out.rate = rate_as(cfg.p, cfg.q, static_cast<int>(cfg.process.dim()), cfg.hypothesis, eta);
  auto ref = detail::prepare_reference(cfg, checkpoints.back());
  const ReferenceEstimator est(std::move(ref.measure), cfg.p, detail::resolved_spec(cfg.estimator, ref.method));

  const RngStream base = RngStream{cfg.seed, 0}.child(0xA5A5A5A5ULL);
  Rng sim_rng(base.child(1));
  auto x0 = sample_invariant(cfg.process, sim_rng, cfg.burn_in);
  const auto path = simulate_path(cfg.process, step_count(checkpoints.back(), cfg.dt), cfg.dt, std::move(x0), sim_rng);
  out.rows.resize(checkpoints.size());
  parallel_for(checkpoints.size(), cfg.threads, [&](std::size_t c) {
    const double T = checkpoints[c];
    Rng est_rng(base.child(100 + c));
    const double v = est.estimate(path.prefix_measure(step_count(T, cfg.dt)), est_rng).value;
    if (!std::isfinite(v)) fail(ErrorKind::NumericOverflow, "non-finite transport estimate at " + detail::identify(T, 0, cfg.seed));
    const double env = eval_rate(out.rate, T);
    out.rows[c] = {T, v, env, v / env};
  });
  const std::size_t n = out.rows.size();
  for (std::size_t c = n / 2; c < n; ++c) out.final_half_max = std::max(out.final_half_max, out.rows[c].ratio);
  for (std::size_t c = n / 3; c < (2 * n + 2) / 3; ++c) out.middle_third_max = std::max(out.middle_third_max, out.rows[c].ratio);
  return out;
}

// ---------------------------------------------------------------------------
// CSV outputs

inline void write_records_csv(std::ostream& os, const ExperimentResult& r) {
  os << "T,replicate,tp,seconds\n" << std::setprecision(17);
  for (const auto& row : r.rows) {
    for (const auto& rec : row.records) os << rec.T << ',' << rec.replicate << ',' << rec.tp_estimate << ',' << rec.seconds << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const ExperimentResult& r, const RateResult& theory) {
  os << "T,mean,std,n,theory_value,ratio\n" << std::setprecision(17);
  for (const auto& row : r.rows) {
    const double th = eval_rate(theory, row.T);
    os << row.T << ',' << row.mean << ',' << row.stdev << ',' << row.n << ',' << th << ',' << row.mean / th << '\n';
  }
}

inline void write_as_csv(std::ostream& os, const AsResult& r) {
  os << "T,tp,envelope,ratio\n" << std::setprecision(17);
  for (const auto& row : r.rows) os << row.T << ',' << row.tp_estimate << ',' << row.envelope << ',' << row.ratio << '\n';
}

/// 2^lo, 2^(lo+1), ..., 2^hi.
inline std::vector<double> dyadic_grid(int lo, int hi) {
  std::vector<double> g;
  for (int e = lo; e <= hi; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

}  // namespace ergowass
