#include "l2inv/pnfb.hpp"

#include "l2inv/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <vector>

namespace l2inv {
namespace {

double line(double t, double x, double y) {
  const double dx = x - y;
  return std::exp(-dx * dx / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

} // namespace

std::string to_string(Geometry g) {
  switch (g) {
  case Geometry::line: return "line";
  case Geometry::halfline_neumann: return "halfline-neumann";
  case Geometry::interval_neumann: return "interval-neumann";
  case Geometry::circle: return "circle";
  }
  return "line";
}

Geometry parse_geometry(const std::string &name) {
  if (name == "line") return Geometry::line;
  if (name == "halfline-neumann") return Geometry::halfline_neumann;
  if (name == "interval-neumann") return Geometry::interval_neumann;
  if (name == "circle") return Geometry::circle;
  fail("InvalidArgument", "unknown geometry '" + name + "'");
}

void Kernel1D::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) fail("InvalidArgument", "length must be positive");
  const bool compact = geometry == Geometry::interval_neumann || geometry == Geometry::circle;
  if (compact && images < 8) fail("InvalidArgument", "compact geometries need at least 8 images");
  if (images < 0) fail("InvalidArgument", "negative image count");
}

bool Kernel1D::contains(double x) const {
  if (!std::isfinite(x)) return false;
  switch (geometry) {
  case Geometry::line: return true;
  case Geometry::halfline_neumann: return x >= 0.0;
  case Geometry::interval_neumann:
  case Geometry::circle: return x >= 0.0 && x <= length;
  }
  return false;
}

double k_eval(const Kernel1D &k, double t, double x, double y) {
  k.validate();
  if (!(t > 0.0) || !std::isfinite(t)) fail("OutOfDomain", "time must be positive");
  if (!k.contains(x) || !k.contains(y)) fail("OutOfDomain", "point outside the " + to_string(k.geometry));
  switch (k.geometry) {
  case Geometry::line: return line(t, x, y);
  case Geometry::halfline_neumann: return line(t, x, y) + line(t, x, -y);
  case Geometry::interval_neumann: {
    // sum from the outside in so the largest terms are added last
    double acc = 0.0;
    for (int a = k.images; a >= 1; --a)
      for (int m : {a, -a}) acc += line(t, x, y + 2.0 * m * k.length) + line(t, x, -y + 2.0 * m * k.length);
    return acc + line(t, x, y) + line(t, x, -y);
  }
  case Geometry::circle: {
    double acc = 0.0;
    for (int a = k.images; a >= 1; --a)
      for (int m : {a, -a}) acc += line(t, x, y + m * k.length);
    return acc + line(t, x, y);
  }
  }
  return 0.0;
}

double image_tail_bound(const Kernel1D &k, double t) {
  k.validate();
  if (!(t > 0.0)) fail("OutOfDomain", "time must be positive");
  double spacing = 0.0;
  double terms = 0.0;
  switch (k.geometry) {
  case Geometry::line:
  case Geometry::halfline_neumann: return 0.0;
  case Geometry::interval_neumann:
    spacing = 2.0 * k.length;
    terms = 4.0;
    break;
  case Geometry::circle:
    spacing = k.length;
    terms = 2.0;
    break;
  }
  // a dropped image of index |m| > M sits at distance >= (|m| - 1) * spacing
  const double m = k.images;
  const double sum = std::exp(-(m * spacing) * (m * spacing) / (4.0 * t)) +
                     std::sqrt(std::numbers::pi * t) / spacing * std::erfc(m * spacing / (2.0 * std::sqrt(t)));
  return terms * sum / std::sqrt(4.0 * std::numbers::pi * t);
}

ComparisonReport boundary_comparison_report(double d, const std::vector<double> &t_grid,
                                            const std::vector<double> &x_grid, double c, double kappa) {
  if (!(c > 0.0) || !(kappa > 0.0)) fail("InvalidArgument", "C and kappa must be positive");
  for (double x : x_grid)
    if (!(x >= d) || !std::isfinite(x)) fail("GridOutOfRange", "grid point x = " + std::to_string(x) + " below D");
  for (double t : t_grid)
    if (!(t > 0.0) || !std::isfinite(t)) fail("GridOutOfRange", "grid times must be positive");
  ComparisonReport rep;
  rep.c = c;
  rep.kappa = kappa;
  for (double t : t_grid)
    for (double x : x_grid) {
      ComparisonRow row;
      row.t = t;
      row.x = x;
      const double log_diff = -0.5 * std::log(4.0 * std::numbers::pi * t) - x * x / t;
      const double log_bound = std::log(c) - 2.0 * x / (kappa * t);
      row.difference = std::exp(log_diff);
      row.bound = std::exp(log_bound);
      row.ratio = std::exp(log_diff - log_bound);
      if (x >= 1.0 && t <= 1.0) {
        if (!rep.worst || row.ratio > rep.max_ratio) {
          rep.max_ratio = row.ratio;
          rep.worst = row;
        }
        if (!(row.ratio <= 1.0)) rep.passed = false;
      }
      rep.rows.push_back(row);
    }
  return rep;
}

void write_csv(std::ostream &out, const ComparisonReport &report) {
  out << "t,x,difference,bound,ratio\n";
  out << std::setprecision(17);
  for (const ComparisonRow &r : report.rows)
    out << r.t << ',' << r.x << ',' << r.difference << ',' << r.bound << ',' << r.ratio << '\n';
}

LargeTimeReport large_time_bound_report(double t0, const std::vector<double> &t_grid,
                                        const std::vector<double> &x_grid, double length, int images) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) fail("InvalidArgument", "t0 must be positive");
  LargeTimeReport rep;
  rep.t0 = t0;
  rep.bound = 3.0 / std::sqrt(4.0 * std::numbers::pi * t0);
  std::vector<double> times;
  for (double t : t_grid) {
    if (t >= t0)
      times.push_back(t);
    else
      ++rep.excluded;
  }
  for (Geometry g : {Geometry::line, Geometry::halfline_neumann, Geometry::interval_neumann, Geometry::circle}) {
    LargeTimeEntry e;
    e.kernel = Kernel1D{g, length, images};
    e.kernel.validate();
    e.bound = rep.bound;
    for (double t : times) {
      const double tail = image_tail_bound(e.kernel, t);
      for (double x : x_grid)
        for (double y : x_grid) {
          if (!e.kernel.contains(x) || !e.kernel.contains(y)) continue;
          e.max_value = std::max(e.max_value, k_eval(e.kernel, t, x, y) + tail);
        }
    }
    e.passed = e.max_value <= e.bound;
    if (!e.passed) rep.passed = false;
    rep.entries.push_back(e);
  }
  return rep;
}

} // namespace l2inv
