#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/rng.hpp"

namespace ergowass {

namespace detail {
/// Neumaier-compensated sum.
inline double accurate_sum(std::span<const double> v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os << std::setprecision(17) << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}
}  // namespace detail

inline constexpr double kWeightSumTolerance = 1e-12;

/// Weighted finite point cloud in R^d. Coordinates are stored row-major,
/// one atom per row. Immutable after construction.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
      : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
    require(dim_ >= 1, ErrorKind::InvalidMeasure, "dimension must be positive");
    require(!weights_.empty(), ErrorKind::InvalidMeasure, "measure needs at least one atom");
    require(coords_.size() == dim_ * weights_.size(), ErrorKind::InvalidMeasure,
            "coordinate count does not match dim * atoms");
    for (double w : weights_) {
      require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidMeasure, "weights must be finite and non-negative");
    }
    for (double c : coords_) require(std::isfinite(c), ErrorKind::InvalidMeasure, "non-finite coordinate");
    const double total = detail::accurate_sum(weights_);
    require(std::abs(total - 1.0) <= kWeightSumTolerance, ErrorKind::InvalidMeasure,
            "weights sum to " + std::to_string(total) + ", expected 1");
    uniform_ = true;
    for (double w : weights_) {
      if (w != weights_.front()) {
        uniform_ = false;
        break;
      }
    }
  }

  /// Uniform weights 1/m over the given rows.
  static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> coords) {
    require(dim >= 1 && !coords.empty() && coords.size() % dim == 0, ErrorKind::InvalidMeasure,
            "coordinates do not form whole atoms");
    const std::size_t m = coords.size() / dim;
    return EmpiricalMeasure(dim, std::move(coords), std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  static EmpiricalMeasure dirac(std::span<const double> x) {
    return EmpiricalMeasure(x.size(), std::vector<double>(x.begin(), x.end()), {1.0});
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool is_uniform() const noexcept { return uniform_; }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  friend bool operator==(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_ && a.weights_ == b.weights_;
  }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  bool uniform_ = false;
};

/// Sum_i w_i |x_i|^q.
inline double moment(const EmpiricalMeasure& nu, double q) {
  require(q > 0.0, ErrorKind::InvalidParameter, "moment order must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) s += nu.weight(i) * std::pow(detail::norm(nu.point(i)), q);
  return s;
}

// ---------------------------------------------------------------------------
// Dyadic shells B_0 = (-1,1]^d, B_n = (-2^n,2^n]^d \ (-2^{n-1},2^{n-1}]^d.

/// Index n of the shell containing x. Boxes are open on the left and closed
/// on the right, so a coordinate equal to 2^{n-1} stays in shell n-1.
inline int shell_of(std::span<const double> x) {
  int n = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    int e = 0;
    const double m = std::frexp(std::abs(v), &e);  // |v| = m 2^e, m in [0.5, 1)
    int need = 0;
    if (v > 0.0) {
      need = (m == 0.5) ? e - 1 : e;  // smallest k with v <= 2^k
    } else {
      need = e;  // smallest k with -v < 2^k
    }
    n = std::max(n, need);
  }
  return n;
}

/// Total weight of atoms in shell n.
inline double shell_mass(const EmpiricalMeasure& nu, int n) {
  std::vector<double> w;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (shell_of(nu.point(i)) == n) w.push_back(nu.weight(i));
  }
  return detail::accurate_sum(w);
}

// ---------------------------------------------------------------------------
// Mollification

enum class MollifierKind { UniformBall, SmoothBump };

struct Mollifier {
  double epsilon = 0.1;
  MollifierKind kind = MollifierKind::UniformBall;
};

/// One draw of xi from the mollifier density on the closed unit ball.
inline void sample_unit_ball(MollifierKind kind, Rng& rng, std::span<double> out) {
  const std::size_t d = out.size();
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (auto& v : out) {
      v = rng.normal();
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  const double dd = static_cast<double>(d);
  double radius = 0.0;
  if (kind == MollifierKind::UniformBall) {
    radius = std::pow(rng.uniform(), 1.0 / dd);
  } else {
    // Radial density proportional to r^{d-1} exp(-1/(1-r^2)); propose from
    // r^{d-1} and accept with exp(1 - 1/(1-r^2)) <= 1.
    for (;;) {
      const double r = std::pow(rng.uniform(), 1.0 / dd);
      if (r >= 1.0) continue;
      if (rng.uniform() < std::exp(1.0 - 1.0 / (1.0 - r * r))) {
        radius = r;
        break;
      }
    }
  }
  radius = std::min(radius, 1.0);
  for (auto& v : out) v *= radius * inv;
  // Rounding can push |xi| a few ulps past 1.
  const double n = detail::norm(out);
  if (n > 1.0) {
    for (auto& v : out) v /= n;
  }
}

/// Sample realisation of nu * L_{eps xi}: every atom is moved by eps * xi_i,
/// xi_i i.i.d. from the mollifier density. Weights are unchanged.
inline EmpiricalMeasure mollify(const EmpiricalMeasure& nu, const Mollifier& m, Rng& rng) {
  require(m.epsilon > 0.0 && m.epsilon < 1.0, ErrorKind::InvalidParameter, "mollifier epsilon must lie in (0,1)");
  std::vector<double> coords = nu.coords();
  std::vector<double> xi(nu.dim());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    sample_unit_ball(m.kind, rng, xi);
    for (std::size_t k = 0; k < nu.dim(); ++k) coords[i * nu.dim() + k] += m.epsilon * xi[k];
  }
  return EmpiricalMeasure(nu.dim(), std::move(coords), nu.weights());
}

// ---------------------------------------------------------------------------
// CSV: header `w,x1,...,xd`, one atom per row.

inline void write_csv(std::ostream& os, const EmpiricalMeasure& nu) {
  os << 'w';
  for (std::size_t k = 1; k <= nu.dim(); ++k) os << ",x" << k;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    os << nu.weight(i);
    for (double v : nu.point(i)) os << ',' << v;
    os << '\n';
  }
}

inline EmpiricalMeasure read_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::InvalidData, "empty measure file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  require(header.size() >= 2 && header[0] == "w", ErrorKind::InvalidData, "header must be w,x1,...,xd");
  for (std::size_t k = 1; k < header.size(); ++k) {
    require(header[k] == "x" + std::to_string(k), ErrorKind::InvalidData, "unexpected header column '" + header[k] + "'");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<double> coords, weights;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        require(used == cell.size(), ErrorKind::InvalidData, "");
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidData, "row " + std::to_string(row) + ": cannot parse '" + cell + "'");
      }
      if (col == 0) {
        weights.push_back(v);
      } else {
        coords.push_back(v);
      }
      ++col;
    }
    require(col == dim + 1, ErrorKind::InvalidData, "row " + std::to_string(row) + " has wrong column count");
  }
  return EmpiricalMeasure(dim, std::move(coords), std::move(weights));
}

inline void save_csv(const std::string& path, const EmpiricalMeasure& nu) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::InvalidParameter, "cannot write " + path);
  write_csv(os, nu);
}

inline EmpiricalMeasure load_csv(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::InvalidParameter, "cannot open " + path);
  return read_csv(is);
}

}  // namespace ergowass
