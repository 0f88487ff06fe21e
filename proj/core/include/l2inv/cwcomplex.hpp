#pragma once

#include "l2inv/fincomplex.hpp"
#include "l2inv/laurent.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace l2inv {

using IMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Laurent matrix with integer coefficients (a matrix over Z[Z^d]).
struct IntLaurentMatrix {
  int d = 1;
  Index rows = 0;
  Index cols = 0;
  std::map<Exponent, IMatrix> terms;

  IntLaurentMatrix() = default;
  IntLaurentMatrix(int d, Index rows, Index cols);

  /// Adds coefficient * t^gamma at entry (i, j).
  IntLaurentMatrix &add(const Exponent &gamma, Index i, Index j, std::int64_t coefficient);
  IntLaurentMatrix &add(const Exponent &gamma, const IMatrix &block);

  bool is_zero() const;
  LaurentMatrix to_complex() const;
};

IntLaurentMatrix product(const IntLaurentMatrix &a, const IntLaurentMatrix &b);

/// Free Z^d-CW data: cells[p] cells in dimension p and cellular
/// differentials c_p : C^p -> C^{p+1} with integer Laurent entries.
class GammaCW {
public:
  GammaCW() = default;

  /// Throws ShapeMismatch or CochainViolation (exact integer check).
  GammaCW(int d, std::vector<Index> cells, std::vector<IntLaurentMatrix> differentials);

  int d() const { return d_; }
  const std::vector<Index> &cells() const { return cells_; }
  Index cells(int p) const;
  const std::vector<IntLaurentMatrix> &differentials() const { return diffs_; }
  IntLaurentMatrix differential(int p) const;
  int top_dimension() const { return static_cast<int>(cells_.size()) - 1; }

  /// Sum of (-1)^p m_p.
  std::int64_t euler_characteristic() const;

private:
  int d_ = 0;
  std::vector<Index> cells_{1};
  std::vector<IntLaurentMatrix> diffs_;
};

/// The line with its free Z-action: one 0-cell, one 1-cell, differential t - 1.
GammaCW circle();

/// The k-fold external product of circles (Koszul complex), m_p = binom(k, p).
GammaCW torus(int k);

/// Graded tensor product over Z^{dx + dy}; exponents are concatenated and
/// c(x (x) y) = c x (x) y + (-1)^p x (x) c y.
GammaCW external_product(const GammaCW &x, const GammaCW &y);

/// Tensor product with a finite complex of the trivial group (same Z^d).
/// The finite factor must have integer entries; throws NonIntegralFactor.
GammaCW product(const GammaCW &x, const FiniteComplex &f);

/// The twisted complex C(X) (x) V, ranks m_p dim(rho). Throws RankMismatch.
ZdComplex assemble(const GammaCW &x, const TwistedRep &rho);

/// Re-indexes exponents along the coordinate inclusion Z^{d0} -> Z^d sending
/// e_j to e_{embed[j]}. Throws BadEmbedding unless embed is injective into [0, d).
GammaCW induce(const GammaCW &x, const std::vector<int> &embed, int d);

} // namespace l2inv
