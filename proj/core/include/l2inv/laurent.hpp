#pragma once

#include "l2inv/linalg.hpp"

#include <map>
#include <span>
#include <vector>

namespace l2inv {

using Exponent = std::vector<int>;

/// Matrix over C[Z^d] = C[t_1^{±1}, ..., t_d^{±1}]: a finite sum of
/// coefficient blocks times monomials t^gamma. d = 0 is the one-point torus.
struct LaurentMatrix {
  int d = 1;
  Index rows = 1;
  Index cols = 1;
  std::map<Exponent, CMatrix> terms;

  LaurentMatrix() = default;
  LaurentMatrix(int d, Index rows, Index cols);

  static LaurentMatrix zero(int d, Index rows, Index cols);
  static LaurentMatrix constant(int d, const CMatrix &block);
  static LaurentMatrix identity(int d, Index n);

  /// Adds block * t^gamma, merging with an existing term.
  LaurentMatrix &add(const Exponent &gamma, const CMatrix &block);

  /// Throws ShapeMismatch / NonFiniteEntry if a term is malformed.
  void validate() const;

  bool is_square() const { return rows == cols; }
};

/// A(z) = sum_gamma terms[gamma] z^gamma with z_j = exp(i theta_j).
CMatrix symbol_at_angles(const LaurentMatrix &a, std::span<const double> theta);

/// Evaluation at a point of (S^1)^d. Throws NotOnTorus if |z_j| != 1.
CMatrix symbol(const LaurentMatrix &a, std::span<const Complex> z);

/// Sum of all coefficient blocks (the symbol at z = (1, ..., 1)).
CMatrix coefficient_sum(const LaurentMatrix &a);

/// Involution: terms[gamma] -> terms[-gamma]^*. Its symbol is the pointwise adjoint.
LaurentMatrix adjoint(const LaurentMatrix &a);
LaurentMatrix product(const LaurentMatrix &a, const LaurentMatrix &b);
LaurentMatrix sum(const LaurentMatrix &a, const LaurentMatrix &b);
LaurentMatrix scaled(const LaurentMatrix &a, Complex s);
LaurentMatrix direct_sum(const LaurentMatrix &a, const LaurentMatrix &b);

/// Drops terms whose block norm is <= tol.
LaurentMatrix pruned(const LaurentMatrix &a, double tol = 0.0);

/// sum_gamma |terms[gamma]|: bounds the symbol norm on the whole torus.
double l1_norm(const LaurentMatrix &a);

/// sum_gamma |terms[gamma]| |gamma|_2: Lipschitz constant of the symbol in
/// the Euclidean metric on the angle cube.
double lipschitz_bound(const LaurentMatrix &a);

/// Largest coefficient block norm.
double max_term_norm(const LaurentMatrix &a);

bool is_hermitian(const LaurentMatrix &a, double rel_tol = 1e-12);

/// Commuting tuple of invertible m x m matrices, rho(e_j) = generators[j].
struct TwistedRep {
  int d = 0;
  std::vector<CMatrix> generators;
  bool unimodular = true;
  Index size = 1;

  Index dim() const { return size; }
};

/// Validates squareness, invertibility and commutation; sets the
/// unimodular flag. Throws ShapeMismatch, NotInvertible, NonCommutingGenerators.
TwistedRep make_twisted_rep(std::vector<CMatrix> generators);

/// The trivial m-dimensional representation of Z^d.
TwistedRep trivial_rep(int d, Index m);

/// rho(gamma) = prod_j g_j^{gamma_j}.
CMatrix rep_at(const TwistedRep &rho, const Exponent &gamma);

/// Cochain complex of free C[Z^d]-modules: c_n : C[Z^d]^{ranks[n]} -> C[Z^d]^{ranks[n+1]}.
class ZdComplex {
public:
  ZdComplex() = default;

  /// Validates shapes and c_{n+1} c_n = 0 (exact Laurent product, with
  /// coefficient norms compared relative to the factors).
  /// Throws ShapeMismatch or CochainViolation.
  ZdComplex(int d, std::vector<LaurentMatrix> differentials);

  /// All differentials zero, with the given module ranks.
  static ZdComplex zero(int d, const std::vector<Index> &ranks);

  int d() const { return d_; }
  int top_degree() const { return static_cast<int>(ranks_.size()) - 1; }
  const std::vector<Index> &ranks() const { return ranks_; }
  Index rank(int n) const;
  const std::vector<LaurentMatrix> &differentials() const { return diffs_; }

  /// c_n, or the zero matrix of the right shape outside the stored range.
  LaurentMatrix differential(int n) const;

  /// Delta_n = c_n^* c_n + c_{n-1} c_{n-1}^*. Throws DegreeOutOfRange.
  LaurentMatrix laplacian(int n) const;

private:
  int d_ = 1;
  std::vector<Index> ranks_{0};
  std::vector<LaurentMatrix> diffs_;
};

} // namespace l2inv
