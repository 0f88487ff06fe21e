#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace l2inv {

enum class Geometry { line, halfline_neumann, interval_neumann, circle };

std::string to_string(Geometry g);
/// Accepts "line", "halfline-neumann", "interval-neumann", "circle". Throws InvalidArgument.
Geometry parse_geometry(const std::string &name);

/// Heat kernel of d^2/dx^2 on a 1-D geometry by the method of images.
struct Kernel1D {
  Geometry geometry = Geometry::line;
  double length = 1.0; ///< L for the interval [0, L] and the circle R / LZ
  int images = 32;     ///< truncation |m| <= M of the image sums

  /// Throws InvalidArgument (L <= 0, or M < 8 for compact geometries).
  void validate() const;
  bool contains(double x) const;
};

/// Throws OutOfDomain for t <= 0 or x, y outside the geometry.
double k_eval(const Kernel1D &k, double t, double x, double y);

/// Upper bound on the images dropped by truncating at |m| <= M, uniform in
/// x, y. Zero for the line and half-line.
double image_tail_bound(const Kernel1D &k, double t);

struct ComparisonRow {
  double t = 0.0;
  double x = 0.0;
  double difference = 0.0; ///< |k_half(t,x,x) - k_line(t,x,x)| = (4 pi t)^{-1/2} e^{-x^2/t}
  double bound = 0.0;      ///< C e^{-2x/(kappa t)}
  double ratio = 0.0;      ///< difference / bound, computed in log space
};

struct ComparisonReport {
  double c = 1.0;
  double kappa = 2.0;
  std::vector<ComparisonRow> rows;
  double max_ratio = 0.0;
  std::optional<ComparisonRow> worst;
  bool passed = true; ///< ratio <= 1 at every row with x >= 1, t <= 1
};

/// Half-line Neumann against the line, on the diagonal. Throws
/// GridOutOfRange if a grid x is below D or a grid t is not positive.
ComparisonReport boundary_comparison_report(double d, const std::vector<double> &t_grid,
                                            const std::vector<double> &x_grid, double c = 1.0,
                                            double kappa = 2.0);

/// CSV with header t,x,difference,bound,ratio.
void write_csv(std::ostream &out, const ComparisonReport &report);

struct LargeTimeEntry {
  Kernel1D kernel;
  double max_value = 0.0;  ///< truncated sum plus image_tail_bound
  double bound = 0.0;
  bool passed = true;
};

struct LargeTimeReport {
  double t0 = 0.0;
  double bound = 0.0; ///< c(t0) = 3 (4 pi t0)^{-1/2}
  std::vector<LargeTimeEntry> entries;
  std::size_t excluded = 0; ///< grid times below t0, skipped
  bool passed = true;
};

/// Checks k(t, x, y) <= c(t0) for t >= t0 over the grid for all four
/// geometries (compact ones with the given length); points outside a
/// geometry's domain are skipped. Throws InvalidArgument for t0 <= 0.
LargeTimeReport large_time_bound_report(double t0, const std::vector<double> &t_grid,
                                        const std::vector<double> &x_grid, double length = 1.0,
                                        int images = 32);

} // namespace l2inv
