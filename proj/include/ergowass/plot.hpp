#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ergowass/error.hpp"
#include "ergowass/rates.hpp"

namespace ergowass {

/// Log-log chart of (T, mean) with the OLS line and the theory line
/// C T^{-e} (log T)^k anchored at the first point. Output depends only on
/// the inputs. Returns false (and writes nothing) for fewer than 2 rows.
inline bool write_plot_svg(std::ostream& os, const std::vector<std::pair<double, double>>& rows, const RateResult& theory) {
  if (rows.size() < 2) return false;
  for (const auto& [t, v] : rows) {
    require(t > 0.0 && v > 0.0, ErrorKind::InvalidData, "plot needs positive T and means");
  }
  constexpr double W = 640, H = 480, L = 70, R = 20, TOP = 30, B = 50;
  std::vector<double> lx, ly;
  for (const auto& [t, v] : rows) {
    lx.push_back(std::log10(t));
    ly.push_back(std::log10(v));
  }
  const double n = static_cast<double>(rows.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double icpt = my - slope * mx;
  const double t0 = rows.front().first;
  auto theory_log10 = [&](double t) {
    const double shape = -theory.exponent * std::log10(t) + theory.log_power * std::log10(std::max(std::log(t), 1e-300));
    const double shape0 = -theory.exponent * std::log10(t0) + theory.log_power * std::log10(std::max(std::log(t0), 1e-300));
    return ly.front() + shape - shape0;
  };

  auto [xmin_it, xmax_it] = std::minmax_element(lx.begin(), lx.end());
  double xmin = *xmin_it, xmax = *xmax_it;
  double ymin = *std::min_element(ly.begin(), ly.end()), ymax = *std::max_element(ly.begin(), ly.end());
  for (double x : {xmin, xmax}) {
    ymin = std::min({ymin, slope * x + icpt, theory_log10(std::pow(10.0, x))});
    ymax = std::max({ymax, slope * x + icpt, theory_log10(std::pow(10.0, x))});
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double padx = 0.05 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - TOP - B); };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<rect x=\"" << L << "\" y=\"" << TOP << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - TOP - B)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = std::ceil(xmin); e <= std::floor(xmax); e += 1.0) {
    s << "<text x=\"" << px(e) << "\" y=\"" << (H - B + 18) << "\" font-size=\"12\" text-anchor=\"middle\">1e"
      << static_cast<int>(e) << "</text>\n";
  }
  for (double e = std::ceil(ymin); e <= std::floor(ymax); e += 1.0) {
    s << "<text x=\"" << (L - 6) << "\" y=\"" << py(e) << "\" font-size=\"12\" text-anchor=\"end\">1e"
      << static_cast<int>(e) << "</text>\n";
  }
  s << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 10) << "\" font-size=\"13\" text-anchor=\"middle\">T</text>\n"
    << "<text x=\"16\" y=\"" << (H / 2) << "\" font-size=\"13\" transform=\"rotate(-90 16 " << (H / 2)
    << ")\" text-anchor=\"middle\">mean T_p</text>\n";
  s << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(slope * xmin + icpt) << "\" x2=\"" << px(xmax) << "\" y2=\""
    << py(slope * xmax + icpt) << "\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
  s << "<polyline fill=\"none\" stroke=\"firebrick\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\" points=\"";
  for (int k = 0; k <= 40; ++k) {
    const double x = xmin + (xmax - xmin) * k / 40.0;
    s << (k ? " " : "") << px(x) << ',' << py(theory_log10(std::pow(10.0, x)));
  }
  s << "\"/>\n";
  for (std::size_t i = 0; i < lx.size(); ++i) {
    s << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"3.5\" fill=\"black\"/>\n";
  }
  s << std::setprecision(4);
  s << "<text x=\"" << (L + 10) << "\" y=\"" << (TOP + 18) << "\" font-size=\"12\" fill=\"steelblue\">fit slope "
    << slope << "</text>\n"
    << "<text x=\"" << (L + 10) << "\" y=\"" << (TOP + 34) << "\" font-size=\"12\" fill=\"firebrick\">theory T^-"
    << theory.exponent << " (log T)^" << theory.log_power << "</text>\n"
    << "</svg>\n";
  os << s.str();
  return true;
}

inline bool emit_plot(const std::string& path, const std::vector<std::pair<double, double>>& rows, const RateResult& theory) {
  if (rows.size() < 2) return false;
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::InvalidParameter, "cannot write " + path);
  return write_plot_svg(os, rows, theory);
}

}  // namespace ergowass
