#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace l2inv {

/// How integrals near the zero set of a symbol are handled. Density curves
/// use uniform grids in plain mode and adaptive cells otherwise.
enum class SingularMode { plain, refine, exclusion };

std::string to_string(SingularMode mode);
/// Throws InvalidPolicy for unknown names.
SingularMode parse_singular_mode(const std::string &name);

struct QuadraturePolicy {
  /// Grid points per torus coordinate; 0 picks 256 / 128 / 48 for d = 1 / 2 / 3
  /// and 24 beyond.
  int base_n = 0;
  /// Number of grids in a doubling sequence (plain grids).
  int levels = 8;
  /// Cauchy tolerance for integrals: |I_k - I_{k-1}| <= max(abs_tol, rel_tol |I_k|).
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  /// Tolerance for density values F(lambda): max(density_abs_tol, density_rel_tol Fhat).
  double density_rel_tol = 1e-3;
  double density_abs_tol = 1e-7;
  /// Novikov-Shubin sampling is purely relative: Fhat may be ~1e-13 in the window.
  double ns_rel_tol = 1e-2;
  SingularMode mode = SingularMode::refine;
  /// Subdivision depth limit for adaptive cells.
  int max_depth = 40;
  /// Symbol evaluations allowed per call.
  std::int64_t max_evaluations = 40'000'000;

  int grid_n(int d) const;
  /// Throws InvalidPolicy (N >= 8, levels >= 2, positive tolerances).
  void validate() const;
};

using TorusFunction = std::function<double(std::span<const double>)>;

/// Mean of f over the midpoint grid with n points per coordinate on [0, 2pi)^d.
/// Evaluations run in parallel; the reduction is sequential and compensated.
double grid_mean(int d, int n, const TorusFunction &f);

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
  int grid = 0;
  std::int64_t evaluations = 0;
};

/// grid_mean on n, 2n, 4n, ... (n = policy.grid_n(d)) until two successive
/// grids agree to tolerance. Throws QuadratureNotConverged.
IntegralEstimate grid_mean_converged(int d, const QuadraturePolicy &policy, const TorusFunction &f);

/// Mean over [0, 2pi) of a periodic f that may have logarithmic
/// singularities at minima of g. Scans g at scan_n points, refines local
/// minima with Brent, splits there and integrates each arc with tanh-sinh.
IntegralEstimate periodic_split_mean(const std::function<double(double)> &f,
                                     const std::function<double(double)> &g, int scan_n,
                                     double rel_tol);

/// Adaptive Gauss-Kronrod mean over [0, 2pi).
IntegralEstimate periodic_gk_mean(const std::function<double(double)> &f, double rel_tol,
                                  unsigned max_depth = 18);

} // namespace l2inv
