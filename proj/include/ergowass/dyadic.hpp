#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/measure.hpp"

namespace ergowass {

/// Address of the cube 2^n F (F in the level-l partition of (-1,1]^d) that
/// contains a point of shell n. At level 0 the only cube is (-2^n, 2^n]^d
/// and all coordinates are 0.
struct DyadicCell {
  int shell = 0;
  int level = 0;
  std::vector<std::int64_t> coords;

  double side() const { return std::ldexp(1.0, shell + 1 - level); }

  friend bool operator==(const DyadicCell&, const DyadicCell&) = default;
};

namespace detail {
/// ceil(v / 2^(n+1-l)) - 1, the index of the half-open cell (c s, (c+1) s].
inline std::int64_t cell_coord(double v, int n, int level) {
  return static_cast<std::int64_t>(std::ceil(std::ldexp(v, level - n - 1))) - 1;
}
}  // namespace detail

inline DyadicCell cell_of(std::span<const double> x, int level) {
  require(level >= 0 && level <= 50, ErrorKind::InvalidParameter, "level must lie in [0, 50]");
  DyadicCell c;
  c.shell = shell_of(x);
  c.level = level;
  c.coords.assign(x.size(), 0);
  if (level > 0) {
    for (std::size_t i = 0; i < x.size(); ++i) c.coords[i] = detail::cell_coord(x[i], c.shell, level);
  }
  return c;
}

/// Per-(shell, level) totals sum_F |nu0 - nu1|(2^n F cap B_n).
struct DyadicSums {
  int ell_max = 0;
  std::vector<std::vector<double>> by_shell;  // [n][l]

  int max_shell() const { return static_cast<int>(by_shell.size()) - 1; }

  /// sum_n 2^{pn} sum_l 2^{-pl} S[n][l]; the lemma constant is not applied.
  double weighted(double p) const {
    double total = 0.0;
    for (std::size_t n = 0; n < by_shell.size(); ++n) {
      double inner = 0.0;
      for (std::size_t l = 0; l < by_shell[n].size(); ++l) {
        inner += std::exp2(-p * static_cast<double>(l)) * by_shell[n][l];
      }
      total += std::exp2(p * static_cast<double>(n)) * inner;
    }
    return total;
  }
};

/// Multilevel cell histogram of a fixed reference measure. Cells at level l
/// are keyed by (index of the parent cell at level l-1, child orthant bits),
/// so a level is a sorted key array and lookups are binary searches.
/// Comparing a measure against the reference costs O(atoms * levels * log).
class DyadicIndex {
 public:
  DyadicIndex(const EmpiricalMeasure& ref, int ell_max) : dim_(ref.dim()), ell_max_(ell_max) {
    require(ell_max >= 0 && ell_max <= 50, ErrorKind::InvalidParameter, "ell_max must lie in [0, 50]");
    require(dim_ <= 24, ErrorKind::Unsupported, "dyadic index supports d <= 24");
    const std::size_t m = ref.size();
    std::vector<int> shells(m);
    std::vector<std::int64_t> fine(m * dim_);
    for (std::size_t a = 0; a < m; ++a) {
      shells[a] = shell_of(ref.point(a));
      max_shell_ = std::max(max_shell_, shells[a]);
      finest(ref.point(a), shells[a], std::span<std::int64_t>(fine.data() + a * dim_, dim_));
    }
    levels_.resize(static_cast<std::size_t>(ell_max) + 1);
    std::vector<std::uint64_t> key(m);
    std::vector<std::uint32_t> idx(m);
    for (int l = 0; l <= ell_max; ++l) {
      for (std::size_t a = 0; a < m; ++a) {
        key[a] = l == 0 ? static_cast<std::uint64_t>(shells[a])
                        : child_key(idx[a], std::span<const std::int64_t>(fine.data() + a * dim_, dim_), l);
      }
      Level& lev = levels_[static_cast<std::size_t>(l)];
      lev.keys = key;
      std::sort(lev.keys.begin(), lev.keys.end());
      lev.keys.erase(std::unique(lev.keys.begin(), lev.keys.end()), lev.keys.end());
      lev.mass.assign(lev.keys.size(), 0.0);
      lev.shell.assign(lev.keys.size(), 0);
      for (std::size_t a = 0; a < m; ++a) {
        const auto j = static_cast<std::uint32_t>(
            std::lower_bound(lev.keys.begin(), lev.keys.end(), key[a]) - lev.keys.begin());
        idx[a] = j;
        lev.mass[j] += ref.weight(a);
        lev.shell[j] = shells[a];
      }
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  int ell_max() const noexcept { return ell_max_; }
  int max_shell() const noexcept { return max_shell_; }

  /// Per-(shell, level) absolute mass differences between nu and the reference.
  DyadicSums compare(const EmpiricalMeasure& nu) const {
    require(nu.dim() == dim_, ErrorKind::InvalidMeasure, "dimension mismatch");
    const std::size_t m = nu.size();
    std::vector<int> shells(m);
    std::vector<std::int64_t> fine(m * dim_);
    int top = max_shell_;
    for (std::size_t a = 0; a < m; ++a) {
      shells[a] = shell_of(nu.point(a));
      top = std::max(top, shells[a]);
      finest(nu.point(a), shells[a], std::span<std::int64_t>(fine.data() + a * dim_, dim_));
    }
    DyadicSums out;
    out.ell_max = ell_max_;
    out.by_shell.assign(static_cast<std::size_t>(top) + 1, std::vector<double>(static_cast<std::size_t>(ell_max_) + 1, 0.0));

    constexpr std::int64_t kOff = -1;
    std::vector<std::int64_t> idx(m, 0);
    std::vector<double> q;
    std::vector<double> off(static_cast<std::size_t>(top) + 1);
    for (int l = 0; l <= ell_max_; ++l) {
      const Level& lev = levels_[static_cast<std::size_t>(l)];
      q.assign(lev.keys.size(), 0.0);
      std::fill(off.begin(), off.end(), 0.0);
      std::uint64_t last_key = 0;
      std::int64_t last_idx = kOff;
      bool have_last = false;
      for (std::size_t a = 0; a < m; ++a) {
        if (l > 0 && idx[a] == kOff) {
          off[static_cast<std::size_t>(shells[a])] += nu.weight(a);
          continue;
        }
        const std::uint64_t k = l == 0 ? static_cast<std::uint64_t>(shells[a])
                                       : child_key(static_cast<std::uint32_t>(idx[a]),
                                                   std::span<const std::int64_t>(fine.data() + a * dim_, dim_), l);
        if (!have_last || k != last_key) {
          const auto it = std::lower_bound(lev.keys.begin(), lev.keys.end(), k);
          last_idx = (it != lev.keys.end() && *it == k) ? static_cast<std::int64_t>(it - lev.keys.begin()) : kOff;
          last_key = k;
          have_last = true;
        }
        idx[a] = last_idx;
        if (last_idx == kOff) {
          off[static_cast<std::size_t>(shells[a])] += nu.weight(a);
        } else {
          q[static_cast<std::size_t>(last_idx)] += nu.weight(a);
        }
      }
      const auto lu = static_cast<std::size_t>(l);
      for (std::size_t j = 0; j < lev.keys.size(); ++j) {
        out.by_shell[static_cast<std::size_t>(lev.shell[j])][lu] += std::abs(q[j] - lev.mass[j]);
      }
      for (std::size_t n = 0; n < off.size(); ++n) out.by_shell[n][lu] += off[n];
    }
    return out;
  }

 private:
  struct Level {
    std::vector<std::uint64_t> keys;
    std::vector<double> mass;
    std::vector<int> shell;
  };

  void finest(std::span<const double> x, int n, std::span<std::int64_t> out) const {
    for (std::size_t i = 0; i < dim_; ++i) out[i] = ell_max_ > 0 ? detail::cell_coord(x[i], n, ell_max_) : 0;
  }

  std::uint64_t child_key(std::uint32_t parent, std::span<const std::int64_t> fine, int l) const {
    std::uint64_t bits = 0;
    const int shift = ell_max_ - l;
    for (std::size_t i = 0; i < dim_; ++i) bits |= static_cast<std::uint64_t>((fine[i] >> shift) & 1) << i;
    return (static_cast<std::uint64_t>(parent) << dim_) | bits;
  }

  std::size_t dim_;
  int ell_max_;
  int max_shell_ = 0;
  std::vector<Level> levels_;
};

inline constexpr int kDefaultEllMax = 12;

/// Multiscale dyadic upper-bound functional
///   D = sum_{n<=n_max} 2^{pn} sum_{l<=ell_max} 2^{-pl} sum_F |nu0 - nu1|(2^n F cap B_n).
/// When n_max is given, every atom must lie in B_0 u ... u B_{n_max}.
inline double dyadic_discrepancy(const EmpiricalMeasure& nu0, const EmpiricalMeasure& nu1, double p,
                                 int ell_max = kDefaultEllMax, std::optional<int> n_max = std::nullopt) {
  require(nu0.dim() == nu1.dim(), ErrorKind::InvalidMeasure, "dimension mismatch");
  require(p > 0.0, ErrorKind::InvalidParameter, "p must be positive");
  if (n_max) {
    require(*n_max >= 0, ErrorKind::InvalidParameter, "n_max must be non-negative");
    for (const auto* nu : {&nu0, &nu1}) {
      for (std::size_t i = 0; i < nu->size(); ++i) {
        if (shell_of(nu->point(i)) > *n_max) {
          fail(ErrorKind::ShellOverflow,
               "point " + detail::format_point(nu->point(i)) + " lies outside shells 0.." + std::to_string(*n_max));
        }
      }
    }
  }
  return DyadicIndex(nu1, ell_max).compare(nu0).weighted(p);
}

}  // namespace ergowass
