#pragma once

#include "l2inv/density.hpp"
#include "l2inv/linalg.hpp"

#include <optional>
#include <span>
#include <vector>

namespace l2inv {

/// Finite-dimensional cochain complex 0 -> C_0 -> C_1 -> ... -> C_N -> 0 of
/// complex vector spaces with the standard inner products. This is the
/// trivial-group case, where the von Neumann trace is the ordinary trace.
class FiniteComplex {
public:
  /// The empty complex: a single degree of dimension 0.
  FiniteComplex() : dims_{0} {}

  /// Validates shapes, finiteness and c_{n+1} c_n = 0.
  /// Throws ShapeMismatch, NonFiniteEntry or CochainViolation.
  explicit FiniteComplex(std::vector<CMatrix> differentials);

  /// A complex with prescribed dimensions and all differentials zero.
  static FiniteComplex zero(const std::vector<Index> &dims);

  int top_degree() const { return static_cast<int>(dims_.size()) - 1; }
  const std::vector<Index> &dims() const { return dims_; }
  const std::vector<CMatrix> &differentials() const { return diffs_; }

  /// Dimension of C_n; 0 outside [0, top_degree()].
  Index dim(int n) const;

  /// c_n : C_n -> C_{n+1}, with zero maps of the right shape outside the
  /// stored range (so c_{-1} and c_N are always available).
  CMatrix differential(int n) const;

private:
  std::vector<Index> dims_;
  std::vector<CMatrix> diffs_;
};

FiniteComplex make_complex(std::vector<CMatrix> differentials);

/// Degreewise direct sum, padding the shorter complex with zero spaces.
FiniteComplex direct_sum(const FiniteComplex &a, const FiniteComplex &b);

/// Delta_n = c_n^* c_n + c_{n-1} c_{n-1}^*. Throws DegreeOutOfRange.
CMatrix laplacian(const FiniteComplex &c, int n);

/// Singular values (descending) of c_n restricted to the orthogonal
/// complement of im(c_{n-1}); the kernel part shows up as zeros.
RVector restricted_singular_values(const FiniteComplex &c, int n);

/// F_n(C, lambda) for each lambda (integer valued here).
DensityReport spectral_density(const FiniteComplex &c, int n, std::span<const double> lambdas);

/// F_n(C, 0) = dim ker Delta_n.
Index betti(const FiniteComplex &c, int n);

/// Finite spectra always have a gap at 0, so this is always kInfinityPlus.
/// Provided so finite complexes expose the same invariants as Z^d ones.
double novikov_shubin_finite(const FiniteComplex &c, int n);

/// log T = 1/2 sum_n (-1)^{n+1} n ln det'(Delta_n), det' = product of the
/// eigenvalues above the zero threshold.
double torsion_finite(const FiniteComplex &c);

// ---------------------------------------------------------------------------
// Property checks. Each returns a report; `passed` summarises it.

struct SandwichReport {
  std::vector<double> lambdas;
  std::vector<Index> derham;        ///< F_p(L_p, lambda)
  std::vector<Index> sobolev;       ///< F_p(D_abs, lambda)
  std::vector<Index> derham_scaled; ///< F_p(L_p, sqrt(2) lambda)
  bool passed = true;
};

/// Compares the level-p de Rham complex with its Sobolev variant, in which
/// C_p carries the graph norm |v|_1^2 = |v|^2 + |c_p v|^2, and checks
/// F_p(L_p, l) <= F_p(D_abs, l) <= F_p(L_p, sqrt(2) l) on the grid.
/// Grid must lie in (0, 1/sqrt(2)]; throws GridOutOfRange.
SandwichReport sobolev_sandwich_check(const FiniteComplex &c, int p,
                                      std::span<const double> lambdas);

struct SesBoundReport {
  double alpha_c = 0.0;
  double alpha_e = 0.0;
  double alpha_1 = 0.0;
  std::vector<double> lambdas; ///< the grid points below alpha_1 that were tested
  std::vector<Index> lhs;      ///< Fhat_n(D, lambda)
  std::vector<Index> rhs;      ///< Fhat_n(C, a_C sqrt(l)) + Fhat_n(E, a_E sqrt(l))
  bool passed = true;
};

/// Short exact sequence 0 -> C -f-> D -g-> E -> 0, with f[n] : C_n -> D_n
/// and g[n] : D_n -> E_n. Checks
///   Fhat_n(D, l) <= Fhat_n(C, a_C l^{1/2}) + Fhat_n(E, a_E l^{1/2})   for l < a_1
/// with a_C = |f_{n+1}^{-1}|^{1/2} |f_n|, a_E = (4 + 2|d_n|) |g_{n+1}| |g_n^{-1}|,
/// a_1 = (4 + 2|d_n|)^{-1/2}, and Fhat(l) := F(l) - F(0) (the density of
/// the part orthogonal to the kernel; the notation is not defined at the
/// source, this is the convention adopted here).
/// Throws NotExact, HypothesisViolated (need b_n(E) = 0 or b_{n+1}(C) = 0).
SesBoundReport ses_bound_check(const FiniteComplex &c, const FiniteComplex &d,
                               const FiniteComplex &e, const std::vector<CMatrix> &f,
                               const std::vector<CMatrix> &g, int n,
                               std::span<const double> lambdas);

struct DilatationReport {
  std::vector<Index> betti_c;
  std::vector<Index> betti_d;
  std::optional<double> witness; ///< smallest c = 2^k (k <= 20) that works
  bool passed = false;
};

/// For homotopy-equivalent C, D: checks equal Betti numbers (else throws
/// NotHomotopyEquivalent) and searches c in {1, 2, 4, ..., 2^20} with
/// F_n(C, l/c) <= F_n(D, l) <= F_n(C, c l) for every degree and grid point.
DilatationReport homotopy_dilatation_check(const FiniteComplex &c, const FiniteComplex &d,
                                           std::span<const double> lambdas);

struct DensityIdentityReport {
  std::vector<double> lambdas;
  std::vector<Index> laplacian_counts; ///< F(Delta_p, lambda)
  std::vector<Index> level_sum;        ///< F_p(sqrt(lambda)) + F_{p-1}(sqrt(lambda))
  bool passed = true;
};

/// Checks F(Delta_p, l) = F_p(L_p, sqrt(l)) + F_{p-1}(L_{p-1}, sqrt(l)).
/// Needs b_p = b_{p-1} = 0; throws HypothesisViolated otherwise.
DensityIdentityReport density_identity_check(const FiniteComplex &c, int p,
                                             std::span<const double> lambdas);

} // namespace l2inv
