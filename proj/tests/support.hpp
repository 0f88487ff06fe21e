#pragma once

#include "l2inv/fincomplex.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace l2inv::test {

using Rng = std::mt19937_64;

inline CMatrix gaussian(Rng &rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      m(i, j) = Complex(re, n(rng));
    }
  return m;
}

inline CMatrix random_unitary(Rng &rng, Index n) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian(rng, n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

inline int uniform_int(Rng &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Builds c_n = R_{n+1} Pi_n where Pi_n projects away from im c_{n-1}: the
// product c_{n+1} c_n then vanishes by construction. With `acyclic` the ranks
// are chosen so that every cohomology group is zero.
inline FiniteComplex random_complex(Rng &rng, int top, bool acyclic) {
  std::vector<Index> rank(static_cast<std::size_t>(top + 1), 0);
  std::vector<Index> dims(rank.size(), 0);
  for (int n = 0; n < top; ++n) rank[n] = uniform_int(rng, 1, 3);
  for (int n = 0; n <= top; ++n) {
    dims[n] = (n > 0 ? rank[n - 1] : 0) + (n < top ? rank[n] : 0);
    if (!acyclic) dims[n] += uniform_int(rng, 0, 1);
  }
  if (top == 0) return FiniteComplex::zero(dims);
  std::vector<CMatrix> diffs;
  CMatrix prev = CMatrix::Zero(dims[0], 0);
  for (int n = 0; n < top; ++n) {
    const CMatrix keep = image_complement_basis(prev);
    // Map a rank[n]-dimensional slice of keep onto a random subspace.
    const CMatrix slice = keep.leftCols(rank[n]);
    const CMatrix target = gaussian(rng, dims[n + 1], rank[n]);
    const CMatrix c = target * slice.adjoint();
    diffs.push_back(c);
    prev = c;
  }
  return FiniteComplex(diffs);
}

/// Unitary change of basis in every degree.
inline FiniteComplex rotated(Rng &rng, const FiniteComplex &x) {
  std::vector<CMatrix> u;
  for (int n = 0; n <= x.top_degree(); ++n) u.push_back(random_unitary(rng, x.dim(n)));
  std::vector<CMatrix> diffs;
  for (int n = 0; n < x.top_degree(); ++n)
    diffs.push_back(u[n + 1] * x.differential(n) * u[n].adjoint());
  if (diffs.empty()) return x;
  return FiniteComplex(diffs);
}

} // namespace l2inv::test
