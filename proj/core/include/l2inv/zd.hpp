#pragma once

#include "l2inv/density.hpp"
#include "l2inv/laurent.hpp"
#include "l2inv/quadrature.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace l2inv {

/// Constant coefficient trace tr(terms[0]) = integral of tr A(z). Throws NotSquare.
Complex vn_trace(const LaurentMatrix &a);

/// F(lambda) = integral over T^d of #{i : sigma_i(A(z)) <= lambda}. Values at
/// lambda = 0 count singular values below the zero threshold. `errors` holds
/// the achieved Cauchy gap or rigorous cell bound per lambda.
/// Throws QuadratureNotConverged.
DensityReport spectral_density_curve(const LaurentMatrix &a, std::span<const double> lambdas,
                                     const QuadraturePolicy &policy);

/// F_p of the complex: c_p restricted to the complement of im c_{p-1}.
DensityReport spectral_density_curve(const ZdComplex &x, int p, std::span<const double> lambdas,
                                     const QuadraturePolicy &policy);

/// Integral of dim ker A(z).
double betti_zd(const LaurentMatrix &a, const QuadraturePolicy &policy);
double betti_zd(const ZdComplex &x, int p, const QuadraturePolicy &policy);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct NsFit {
  double alpha = kInfinityPlus; ///< slope, or kInfinityPlus when Fhat vanishes in the window
  double r_squared = 1.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of ln(F - F(0)) against ln lambda over the curve
/// points in [lo, hi]. A finite-window estimator of the Novikov-Shubin
/// invariant, not the liminf itself. Throws InsufficientPoints (< 3 points).
NsFit ns_fit(const DensityReport &curve, double lo = 1e-4, double hi = 1e-1);

/// Samples F_p on `points` log-spaced values of [lo, hi] and fits.
NsFit ns_estimate(const ZdComplex &x, int p, const QuadraturePolicy &policy, double lo = 1e-4,
                  double hi = 1e-1, std::size_t points = 13);

/// Largest numerical rank of A(z) over a fixed set of sample points.
Index generic_rank(const LaurentMatrix &a);

struct FkReport {
  double value = 0.0;
  double error = 0.0;
  std::int64_t evaluations = 0;
  Index generic_rank = 0;
};

/// Integral of ln det'|A(z)|. With `allow_kernel` false the symbol must be
/// invertible almost everywhere (IdenticallySingular otherwise); with it
/// true the product runs over the generically nonzero singular values.
/// Throws NotSquare, IdenticallySingular, QuadratureNotConverged.
FkReport fk_log_det_report(const LaurentMatrix &a, const QuadraturePolicy &policy,
                           bool allow_kernel = false);
double fk_log_det(const LaurentMatrix &a, const QuadraturePolicy &policy);
double fk_log_det_prime(const LaurentMatrix &a, const QuadraturePolicy &policy);

struct DetClassReport {
  bool flag = false;
  double integral = 0.0;
  std::vector<double> cutoffs;      ///< eps (Stieltjes) or T (heat)
  std::vector<double> partial_sums; ///< one per cutoff
};

/// Estimates the integral over (0, 1] of ln(lambda) dF(A, lambda) by parts on a
/// geometric grid, cut off at eps in {1e-2, 1e-4, 1e-6}; the flag is the
/// Cauchy test on the three partial sums.
DetClassReport det_class_check(const LaurentMatrix &a, const QuadraturePolicy &policy,
                               bool allow_kernel = false);

/// Heat form: the integral over [1, T] of t^{-1} (tr e^{-t A^*A} - b) dt for
/// T in {1e2, 1e4, 1e6}, with the same Cauchy test.
DetClassReport det_class_heat_check(const LaurentMatrix &a, const QuadraturePolicy &policy,
                                    bool allow_kernel = false);

/// Integral of tr exp(-t A(z)). Throws NotHermitian, InvalidArgument (t <= 0).
double heat_trace_zd(const LaurentMatrix &a, double t, const QuadraturePolicy &policy);

/// Coefficients terms[gamma] (x) rho(gamma). Throws RankMismatch.
LaurentMatrix twist(const LaurentMatrix &a, const TwistedRep &rho);
ZdComplex twist_complex(const ZdComplex &x, const TwistedRep &rho);

struct ZdTorsionReport {
  double log_torsion = 0.0;
  std::vector<double> log_dets; ///< ln det'(Delta_n) per degree
};

/// 1/2 sum_n (-1)^{n+1} n ln det'(Delta_n), after checking every Laplacian
/// is of determinant class. Throws NotDeterminantClass.
ZdTorsionReport torsion_zd_report(const ZdComplex &x, const QuadraturePolicy &policy);
double torsion_zd(const ZdComplex &x, const QuadraturePolicy &policy);

} // namespace l2inv
