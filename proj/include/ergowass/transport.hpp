#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergowass/dyadic.hpp"
#include "ergowass/error.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/rng.hpp"

namespace ergowass {

/// |x - y|^p.
inline double ground_cost(std::span<const double> x, std::span<const double> y, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x[i] - y[i];
    s += t * t;
  }
  if (p == 2.0) return s;
  if (p == 1.0) return std::sqrt(s);
  return std::pow(s, p / 2.0);
}

/// The metric W_p = T_p^{min(1, 1/p)}.
inline double wasserstein_from_cost(double cost, double p) { return std::pow(cost, std::min(1.0, 1.0 / p)); }

struct PlanEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

/// A coupling of two discrete measures together with its cost.
struct TransportPlan {
  std::vector<PlanEntry> pairs;
  double cost = 0.0;
  double p = 1.0;
};

struct ExactResult {
  double cost = 0.0;
  TransportPlan plan;
};

inline constexpr std::size_t kDefaultCostCap = 4'000'000;

namespace detail {

inline void check_pair(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  require(a.dim() == b.dim(), ErrorKind::InvalidMeasure, "measures have different dimensions");
  require(p > 0.0 && std::isfinite(p), ErrorKind::InvalidParameter, "p must be positive");
}

/// Monotone coupling of two sorted 1-D weighted atom lists.
inline double tp_1d_sorted(std::span<const double> x0, std::span<const double> w0, std::span<const double> x1,
                           std::span<const double> w1, double p) {
  std::size_t i = 0, j = 0;
  double ra = w0.empty() ? 0.0 : w0[0];
  double rb = w1.empty() ? 0.0 : w1[0];
  double cost = 0.0;
  while (i < x0.size() && j < x1.size()) {
    const double gap = std::abs(x0[i] - x1[j]);
    const double c = p == 1.0 ? gap : (p == 2.0 ? gap * gap : std::pow(gap, p));
    if (ra <= rb) {
      cost += ra * c;
      rb -= ra;
      if (++i < x0.size()) ra = w0[i];
    } else {
      cost += rb * c;
      ra -= rb;
      if (++j < x1.size()) rb = w1[j];
    }
  }
  return cost;
}

struct Sorted1d {
  std::vector<double> x, w;
};

inline Sorted1d sort_1d(const EmpiricalMeasure& nu) {
  std::vector<std::size_t> order(nu.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& c = nu.coords();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  Sorted1d s;
  s.x.reserve(order.size());
  s.w.reserve(order.size());
  for (auto k : order) {
    s.x.push_back(c[k]);
    s.w.push_back(nu.weight(k));
  }
  return s;
}

inline std::vector<double> cost_matrix(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  std::vector<double> c(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.point(i);
    for (std::size_t j = 0; j < b.size(); ++j) c[i * b.size() + j] = ground_cost(x, b.point(j), p);
  }
  return c;
}

/// Minimum-cost perfect matching on an n x n matrix (shortest augmenting
/// paths with dual potentials). Returns the column assigned to each row.
inline std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double* row = cost.data() + (i0 - 1) * n;
      const double ui0 = u[i0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

/// Integer masses summing exactly to `scale`, each within one unit of w_i * scale
/// (largest-remainder apportionment).
inline std::vector<std::int64_t> integerize(std::span<const double> w, std::int64_t scale) {
  const double total = accurate_sum(w);
  std::vector<std::int64_t> out(w.size());
  std::vector<std::pair<double, std::size_t>> rem(w.size());
  std::int64_t used = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double exact = w[i] / total * static_cast<double>(scale);
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    rem[i] = {exact - static_cast<double>(out[i]), i};
    used += out[i];
  }
  std::int64_t left = scale - used;
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; left > 0; k = (k + 1) % rem.size(), --left) ++out[rem[k].second];
  for (std::size_t k = rem.size(); left < 0; --left) {
    k = (k == 0 ? rem.size() : k) - 1;
    auto& o = out[rem[k].second];
    if (o > 0) {
      --o;
    } else {
      ++left;
    }
  }
  return out;
}

/// Successive shortest paths on the dense bipartite transportation network
/// with integer supplies. Dijkstra runs on reduced costs kept non-negative
/// by node potentials. Returns (source, target, units) for positive flows.
inline std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> solve_transport(
    std::span<const double> cost, std::vector<std::int64_t> supply, std::vector<std::int64_t> demand) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n0 = supply.size(), n1 = demand.size();
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> into(n1);  // flows per target
  std::vector<double> pot_s(n0, 0.0), pot_t(n1, 0.0), dist_s(n0), dist_t(n1);
  std::vector<char> done_s(n0), done_t(n1);
  std::vector<std::ptrdiff_t> prev_s(n0), prev_t(n1);
  auto flow_ref = [&](std::size_t i, std::size_t j) -> std::int64_t& {
    for (auto& [src, f] : into[j]) {
      if (src == i) return f;
    }
    into[j].emplace_back(i, 0);
    return into[j].back().second;
  };
  std::int64_t remaining = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  while (remaining > 0) {
    std::fill(dist_s.begin(), dist_s.end(), kInf);
    std::fill(dist_t.begin(), dist_t.end(), kInf);
    std::fill(done_s.begin(), done_s.end(), 0);
    std::fill(done_t.begin(), done_t.end(), 0);
    for (std::size_t i = 0; i < n0; ++i) {
      prev_s[i] = -1;
      if (supply[i] > 0) dist_s[i] = 0.0;
    }
    std::ptrdiff_t target = -1;
    for (;;) {
      double best = kInf;
      std::ptrdiff_t bs = -1, bt = -1;
      for (std::size_t i = 0; i < n0; ++i) {
        if (!done_s[i] && dist_s[i] < best) {
          best = dist_s[i];
          bs = static_cast<std::ptrdiff_t>(i);
        }
      }
      for (std::size_t j = 0; j < n1; ++j) {
        if (!done_t[j] && dist_t[j] < best) {
          best = dist_t[j];
          bt = static_cast<std::ptrdiff_t>(j);
          bs = -1;
        }
      }
      if (bs < 0 && bt < 0) break;
      if (bt >= 0) {
        const auto j = static_cast<std::size_t>(bt);
        done_t[j] = 1;
        if (demand[j] > 0) {
          target = bt;
          break;
        }
        for (const auto& [i, f] : into[j]) {
          if (f <= 0 || done_s[i]) continue;
          const double rc = std::max(0.0, -cost[i * n1 + j] + pot_t[j] - pot_s[i]);
          if (dist_t[j] + rc < dist_s[i]) {
            dist_s[i] = dist_t[j] + rc;
            prev_s[i] = bt;
          }
        }
      } else {
        const auto i = static_cast<std::size_t>(bs);
        done_s[i] = 1;
        const double* row = cost.data() + i * n1;
        for (std::size_t j = 0; j < n1; ++j) {
          if (done_t[j]) continue;
          const double nd = dist_s[i] + std::max(0.0, row[j] + pot_s[i] - pot_t[j]);
          if (nd < dist_t[j]) {
            dist_t[j] = nd;
            prev_t[j] = bs;
          }
        }
      }
    }
    require(target >= 0, ErrorKind::InvalidMeasure, "transport network infeasible");
    const double reach = dist_t[static_cast<std::size_t>(target)];
    for (std::size_t i = 0; i < n0; ++i) pot_s[i] += std::min(dist_s[i], reach);
    for (std::size_t j = 0; j < n1; ++j) pot_t[j] += std::min(dist_t[j], reach);

    // Bottleneck along target <- source (<- target' <- source')*.
    std::int64_t push = demand[static_cast<std::size_t>(target)];
    std::size_t j = static_cast<std::size_t>(target);
    std::size_t i = static_cast<std::size_t>(prev_t[j]);
    while (prev_s[i] >= 0) {
      const auto jj = static_cast<std::size_t>(prev_s[i]);
      push = std::min(push, flow_ref(i, jj));
      i = static_cast<std::size_t>(prev_t[jj]);
    }
    push = std::min(push, supply[i]);
    supply[i] -= push;
    demand[static_cast<std::size_t>(target)] -= push;
    remaining -= push;
    j = static_cast<std::size_t>(target);
    i = static_cast<std::size_t>(prev_t[j]);
    for (;;) {
      flow_ref(i, j) += push;
      if (prev_s[i] < 0) break;
      const auto jj = static_cast<std::size_t>(prev_s[i]);
      flow_ref(i, jj) -= push;
      j = jj;
      i = static_cast<std::size_t>(prev_t[jj]);
    }
  }
  std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> out;
  for (std::size_t j = 0; j < n1; ++j) {
    for (const auto& [i, f] : into[j]) {
      if (f > 0) out.emplace_back(i, j, f);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Exact T_p for d = 1 and p >= 1 via the monotone (quantile) coupling.
inline double tp_1d(const EmpiricalMeasure& nu0, const EmpiricalMeasure& nu1, double p) {
  detail::check_pair(nu0, nu1, p);
  require(nu0.dim() == 1, ErrorKind::Unsupported, "tp_1d needs dimension 1");
  require(p >= 1.0, ErrorKind::Unsupported, "tp_1d needs p >= 1; use tp_exact for concave costs");
  const auto a = detail::sort_1d(nu0);
  const auto b = detail::sort_1d(nu1);
  return detail::tp_1d_sorted(a.x, a.w, b.x, b.w, p);
}

/// Exact minimum-cost coupling for any p > 0. Equal-size uniform measures go
/// through the assignment solver; everything else through min-cost flow on
/// integerised masses.
inline ExactResult tp_exact(const EmpiricalMeasure& nu0, const EmpiricalMeasure& nu1, double p,
                            std::size_t cap = kDefaultCostCap) {
  detail::check_pair(nu0, nu1, p);
  const std::size_t n0 = nu0.size(), n1 = nu1.size();
  if (n0 > cap / n1) {
    fail(ErrorKind::TooLarge, std::to_string(n0) + " x " + std::to_string(n1) +
                                  " cost entries exceed the cap of " + std::to_string(cap) +
                                  "; use the subsampled-exact estimator");
  }
  const auto cost = detail::cost_matrix(nu0, nu1, p);
  ExactResult r;
  r.plan.p = p;
  if (nu0.is_uniform() && nu1.is_uniform() && n0 == n1) {
    const auto match = detail::solve_assignment(cost, n0);
    const double m = 1.0 / static_cast<double>(n0);
    for (std::size_t i = 0; i < n0; ++i) {
      r.plan.pairs.push_back({i, match[i], m});
      r.cost += m * cost[i * n0 + match[i]];
    }
  } else {
    std::int64_t scale = std::int64_t{1} << 40;
    if (nu0.is_uniform() && nu1.is_uniform()) {
      const auto l = std::lcm(static_cast<std::int64_t>(n0), static_cast<std::int64_t>(n1));
      if (l <= scale) scale = l;
    }
    auto flows = detail::solve_transport(cost, detail::integerize(nu0.weights(), scale),
                                         detail::integerize(nu1.weights(), scale));
    const double s = static_cast<double>(scale);
    for (const auto& [i, j, f] : flows) {
      const double m = static_cast<double>(f) / s;
      r.plan.pairs.push_back({i, j, m});
      r.cost += m * cost[i * n1 + j];
    }
  }
  r.plan.cost = r.cost;
  return r;
}

/// Exact T_p by enumerating all k! permutation couplings of two uniform
/// measures with k <= 8 atoms each.
inline double tp_bruteforce(const EmpiricalMeasure& nu0, const EmpiricalMeasure& nu1, double p) {
  detail::check_pair(nu0, nu1, p);
  const std::size_t k = nu0.size();
  require(nu1.size() == k && nu0.is_uniform() && nu1.is_uniform() && k <= 8, ErrorKind::Unsupported,
          "brute force needs two uniform measures with the same k <= 8 atoms");
  const auto cost = detail::cost_matrix(nu0, nu1, p);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += cost[i * k + perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Estimator dispatch

enum class Method { Auto, Exact, OneD, Dyadic, SubsampledExact };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::Auto: return "auto";
    case Method::Exact: return "exact";
    case Method::OneD: return "one-d";
    case Method::Dyadic: return "dyadic";
    case Method::SubsampledExact: return "subsampled-exact";
  }
  return "auto";
}

inline Method parse_method(std::string_view s) {
  for (auto m : {Method::Auto, Method::Exact, Method::OneD, Method::Dyadic, Method::SubsampledExact}) {
    if (to_string(m) == s) return m;
  }
  fail(ErrorKind::InvalidParameter, "unknown estimator '" + std::string(s) + "'");
}

struct EstimatorSpec {
  Method method = Method::Auto;
  std::size_t k = 512;        ///< subsample size (subsampled-exact)
  std::size_t repeats = 4;    ///< subsample repeats (subsampled-exact)
  int ell_max = kDefaultEllMax;  ///< dyadic truncation
  std::size_t cap = kDefaultCostCap;
};

struct Estimate {
  double value = 0.0;
  Method method_used = Method::Auto;
  // Dyadic
  std::optional<int> ell_max;
  std::optional<int> n_max;
  // Subsampled-exact
  std::optional<double> subsample_variance;
  std::optional<std::size_t> subsample_k;
};

namespace detail {
/// Uniform k-atom subsample: without replacement for uniform measures,
/// weighted draws with replacement otherwise. Measures with at most k atoms
/// are returned unchanged.
inline EmpiricalMeasure subsample(const EmpiricalMeasure& nu, std::size_t k, Rng& rng) {
  if (nu.size() <= k && nu.is_uniform()) return nu;
  const std::size_t d = nu.dim();
  std::vector<double> coords;
  coords.reserve(k * d);
  if (nu.is_uniform()) {
    std::vector<std::size_t> idx(nu.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t r = t + static_cast<std::size_t>(rng.below(nu.size() - t));
      std::swap(idx[t], idx[r]);
      const auto x = nu.point(idx[t]);
      coords.insert(coords.end(), x.begin(), x.end());
    }
  } else {
    std::vector<double> cdf(nu.size());
    std::partial_sum(nu.weights().begin(), nu.weights().end(), cdf.begin());
    for (std::size_t t = 0; t < k; ++t) {
      const double u = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      const auto x = nu.point(static_cast<std::size_t>(it - cdf.begin()));
      coords.insert(coords.end(), x.begin(), x.end());
    }
  }
  return EmpiricalMeasure::uniform(d, std::move(coords));
}
}  // namespace detail

/// T_p estimator against a fixed reference measure. Caches what the chosen
/// method needs (sorted atoms, dyadic index) so repeated queries are cheap.
class ReferenceEstimator {
 public:
  ReferenceEstimator(EmpiricalMeasure ref, double p, EstimatorSpec spec)
      : ref_(std::move(ref)), p_(p), spec_(spec) {
    require(p > 0.0, ErrorKind::InvalidParameter, "p must be positive");
    if (spec_.method == Method::SubsampledExact) {
      require(spec_.k >= 1 && spec_.repeats >= 1, ErrorKind::InvalidParameter, "subsample k and repeats must be >= 1");
    }
    if (spec_.method == Method::OneD || (spec_.method == Method::Auto && ref_.dim() == 1 && p_ >= 1.0)) {
      require(ref_.dim() == 1 && p_ >= 1.0, ErrorKind::Unsupported, "one-d estimator needs d = 1 and p >= 1");
      sorted_ = detail::sort_1d(ref_);
    }
    if (spec_.method == Method::Dyadic) dyadic_.emplace(ref_, spec_.ell_max);
  }

  const EmpiricalMeasure& reference() const noexcept { return ref_; }
  const EstimatorSpec& spec() const noexcept { return spec_; }
  double p() const noexcept { return p_; }

  /// Method `auto` resolves to for a query with `n` atoms.
  Method resolve(std::size_t n) const {
    if (spec_.method != Method::Auto) return spec_.method;
    if (sorted_) return Method::OneD;
    if (n <= spec_.cap / ref_.size()) return Method::Exact;
    return Method::SubsampledExact;
  }

  Estimate estimate(const EmpiricalMeasure& nu, Rng& rng) const {
    require(nu.dim() == ref_.dim(), ErrorKind::InvalidMeasure, "dimension mismatch");
    Estimate e;
    e.method_used = resolve(nu.size());
    switch (e.method_used) {
      case Method::OneD: {
        const auto s = detail::sort_1d(nu);
        e.value = detail::tp_1d_sorted(s.x, s.w, sorted_->x, sorted_->w, p_);
        break;
      }
      case Method::Exact:
        e.value = tp_exact(nu, ref_, p_, spec_.cap).cost;
        break;
      case Method::Dyadic: {
        const auto sums = dyadic_->compare(nu);
        e.value = sums.weighted(p_);
        e.ell_max = spec_.ell_max;
        e.n_max = sums.max_shell();
        break;
      }
      case Method::SubsampledExact: {
        // Matched sizes keep every solve on the assignment path.
        std::size_t k = std::min(spec_.k, ref_.size());
        if (nu.is_uniform()) k = std::min(k, nu.size());
        std::vector<double> vals;
        for (std::size_t r = 0; r < spec_.repeats; ++r) {
          const auto a = detail::subsample(nu, k, rng);
          const auto b = detail::subsample(ref_, k, rng);
          vals.push_back(tp_exact(a, b, p_, spec_.cap).cost);
        }
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        e.value = mean;
        e.subsample_variance = vals.size() > 1 ? var / static_cast<double>(vals.size() - 1) : 0.0;
        e.subsample_k = k;
        break;
      }
      case Method::Auto:
        break;
    }
    return e;
  }

 private:
  EmpiricalMeasure ref_;
  double p_;
  EstimatorSpec spec_;
  std::optional<detail::Sorted1d> sorted_;
  std::optional<DyadicIndex> dyadic_;
};

/// Dispatching estimate of T_p(nu0, nu1). The dyadic method reports the
/// multiscale functional without its lemma constant.
inline Estimate estimate_tp(const EmpiricalMeasure& nu0, const EmpiricalMeasure& nu1, double p,
                            const EstimatorSpec& spec, Rng& rng) {
  detail::check_pair(nu0, nu1, p);
  return ReferenceEstimator(nu1, p, spec).estimate(nu0, rng);
}

}  // namespace ergowass
