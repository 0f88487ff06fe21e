#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace l2inv {

/// Which constants multiply the kappa sum in the regularised zeta derivative.
/// `standard`: c(i, n) = 2/(i - n) for i != n and gamma (Euler) for i = n,
/// which is what the Mellin transform gives. `alternate`: -(n - i)/2 and
/// Gamma'(1) = -gamma, kept only for comparison with that printed variant.
enum class CoeffConvention { standard, alternate };

/// Throws IndexOutOfRange unless 0 <= i <= n.
double c_coeff(int i, int n, CoeffConvention convention = CoeffConvention::standard);

/// theta_p(t) = nu tr exp(-t Delta_p): a callable or a table of samples.
class HeatTrace {
public:
  HeatTrace() = default;
  static HeatTrace callable(std::function<double(double)> fn, std::string label = {});
  /// Strictly increasing positive times, finite non-negative values, at
  /// least 4 samples, reaching t = 1. Throws BadTable.
  static HeatTrace table(std::vector<double> ts, std::vector<double> values, std::string label = {});

  double operator()(double t) const;
  bool is_table() const { return !ts_.empty(); }
  const std::vector<double> &times() const { return ts_; }
  const std::vector<double> &values() const { return values_; }
  /// Returns a copy scaled by s (tables rescaled sample by sample).
  HeatTrace scaled(double s) const;

  /// kappa_0 .. kappa_n of theta ~ sum_i kappa_i t^{-(n-i)/2}; empty when unknown.
  std::optional<std::vector<double>> kappas;
  std::string label;

private:
  std::function<double(double)> fn_;
  std::vector<double> ts_;
  std::vector<double> values_;
  std::shared_ptr<const std::function<double(double)>> interp_;
};

struct HeatTraceModel {
  int n = 1;
  std::vector<HeatTrace> degrees; ///< theta_0 .. theta_n
  CoeffConvention convention = CoeffConvention::standard;
  /// Set for homogeneous-trace models: the leading coefficient must then be positive.
  bool require_positive_leading = false;
  std::string label;
};

struct ZetaEstimate {
  double value = 0.0;
  double error = 0.0;
};

/// zeta_p'(0) = int_0^1 (theta_p - sum_i kappa_i t^{-(n-i)/2}) dt/t + sum_i c(i, n) kappa_i.
/// Throws MissingKappas, AsymptoticsMismatch (remainder not O(t^{1/2}) on the
/// three smallest sample times), DegreeOutOfRange.
ZetaEstimate small_time_zeta_derivative(const HeatTraceModel &model, int p);

/// int_1^infinity theta_p(t) dt/t: quadrature up to the end of the table
/// (1e3 for callables) plus a fitted tail A exp(-b t) t^{-c}.
/// Throws DivergentTail when the fit does not decay.
ZetaEstimate large_time_integral(const HeatTraceModel &model, int p);

struct TorsionBreakdown {
  std::vector<double> zeta_derivatives;
  std::vector<double> tails;
  std::vector<double> errors;
  double total = 0.0; ///< sum_p (p/2)(-1)^{p+1}(zeta_p'(0) + tail_p)
};

/// Errors from a degree are rethrown with the degree in the message.
TorsionBreakdown log_torsion(const HeatTraceModel &model);

struct KappaFit {
  std::vector<double> kappas; ///< kappa_0 .. kappa_n
  double remainder = 0.0;     ///< coefficient of the extra t^{1/2} column
  double residual = 0.0;      ///< RMS residual relative to RMS theta
  double condition = 0.0;     ///< of the column-scaled design matrix
};

/// Least squares theta(t) ~ sum_i kappa_i t^{-(n-i)/2} + r t^{1/2} on the
/// samples with t <= window. Throws IllConditionedFit (too few samples, or
/// condition number above 1e12).
KappaFit fit_kappa(const std::vector<double> &ts, const std::vector<double> &values, int n,
                   double window = 1.0);

/// Fits kappas for every degree from its samples (tables: table points;
/// callables: 40 log-spaced points in [1e-4, window]).
HeatTraceModel with_fitted_kappas(HeatTraceModel model, double window = 0.1);

/// Flat R^n: theta_p = binom(n, p) vol (4 pi t)^{-n/2} with exact kappas.
/// Throws InvalidArgument unless n >= 1 and vol > 0.
HeatTrace free_space_trace(int n, double vol, int p);
HeatTraceModel free_space_model(int n, double vol);

/// theta_p = vol H_p from per-degree tables of the homogeneous trace H_p.
/// Needs odd n, n + 1 positive tables. Kappas are left to fit.
/// Throws BadTable.
HeatTraceModel plancherel_model(const std::vector<std::pair<std::vector<double>, std::vector<double>>> &tables,
                                int n, double vol);

/// Heat kernel of hyperbolic 3-space on functions at distance r:
/// (4 pi t)^{-3/2} (r / sinh r) exp(-t - r^2 / (4t)).
double hyperbolic3_heat_kernel(double r, double t);

/// Its diagonal H_0(t) = exp(-t) (4 pi t)^{-3/2}.
double hyperbolic3_trace_density(double t);

} // namespace l2inv
