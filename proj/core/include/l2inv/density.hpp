#pragma once

#include <limits>
#include <vector>

namespace l2inv {

/// Sentinel for the Novikov-Shubin invariant "infinity-plus": the spectral
/// density vanishes on a neighbourhood of 0 (spectral gap).
inline constexpr double kInfinityPlus = std::numeric_limits<double>::infinity();

/// A sampled spectral density function F(lambda).
struct DensityReport {
  std::vector<double> lambdas; ///< sorted ascending, >= 0
  std::vector<double> values;  ///< F(lambda), nondecreasing
  double betti = 0.0;          ///< F(0)
  /// Per-lambda error estimate; all zeros for exact (finite) densities.
  std::vector<double> errors;
};

} // namespace l2inv
