#include "l2inv/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace l2inv {

RVector singular_values(const CMatrix &m) {
  const Index cols = m.cols();
  RVector out = RVector::Zero(cols);
  if (cols == 0 || m.rows() == 0) return out;
  if (cols == 1) {
    out(0) = m.col(0).norm();
    return out;
  }
  if (m.rows() == 1) {
    out(0) = m.row(0).norm();
    return out;
  }
  RVector s;
  if (std::max(m.rows(), cols) <= 16) {
    s = Eigen::JacobiSVD<CMatrix>(m).singularValues();
  } else {
    s = Eigen::BDCSVD<CMatrix>(m).singularValues();
  }
  out.head(s.size()) = s;
  return out;
}

double spectral_norm(const CMatrix &m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

Index numerical_rank(const CMatrix &m) {
  if (m.size() == 0) return 0;
  const RVector s = singular_values(m);
  const double thr = zero_threshold(s(0));
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

RVector hermitian_eigenvalues(const CMatrix &h) {
  if (h.size() == 0) return RVector();
  if (h.rows() == 1) return RVector::Constant(1, h(0, 0).real());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

CMatrix image_basis(const CMatrix &m) {
  if (m.size() == 0) return CMatrix(m.rows(), 0);
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU);
  const RVector &s = svd.singularValues();
  const double thr = zero_threshold(s.size() ? s(0) : 0.0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

CMatrix image_complement_basis(const CMatrix &m) {
  if (m.rows() == 0) return CMatrix(0, 0);
  if (m.cols() == 0) return CMatrix::Identity(m.rows(), m.rows());
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU);
  const RVector &s = svd.singularValues();
  const double thr = zero_threshold(s.size() ? s(0) : 0.0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixU().rightCols(m.rows() - r);
}

CMatrix kernel_basis(const CMatrix &m) {
  if (m.cols() == 0) return CMatrix(0, 0);
  if (m.rows() == 0) return CMatrix::Identity(m.cols(), m.cols());
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector &s = svd.singularValues();
  const double thr = zero_threshold(s.size() ? s(0) : 0.0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

Index count_at_most(const RVector &v, double x) {
  Index n = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) <= x) ++n;
  return n;
}

bool all_finite(const CMatrix &m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

} // namespace l2inv
