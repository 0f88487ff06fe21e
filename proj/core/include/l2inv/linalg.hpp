#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace l2inv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative zero threshold shared by every module: a singular value or
/// eigenvalue s counts as zero when s <= 1e-10 * (1 + s_max).
inline constexpr double kZeroRelTol = 1e-10;

inline double zero_threshold(double largest) { return kZeroRelTol * (1.0 + largest); }

/// Singular values sorted descending, always `cols` of them (padded with
/// zeros when rows < cols), i.e. the spectrum of |m| on the domain.
RVector singular_values(const CMatrix &m);

double spectral_norm(const CMatrix &m);

/// Rank under the shared zero threshold.
Index numerical_rank(const CMatrix &m);

/// Eigenvalues of a Hermitian matrix, ascending.
RVector hermitian_eigenvalues(const CMatrix &h);

/// Orthonormal basis (columns) of the image of m.
CMatrix image_basis(const CMatrix &m);

/// Orthonormal basis (columns) of the orthogonal complement of the image of
/// m inside its codomain.
CMatrix image_complement_basis(const CMatrix &m);

/// Orthonormal basis of ker m.
CMatrix kernel_basis(const CMatrix &m);

/// Number of entries of v that are <= x.
Index count_at_most(const RVector &v, double x);

bool all_finite(const CMatrix &m);

/// Neumaier-compensated sum in index order.
double stable_sum(std::span<const double> values);

/// Kronecker product a (x) b.
CMatrix kron(const CMatrix &a, const CMatrix &b);

} // namespace l2inv
