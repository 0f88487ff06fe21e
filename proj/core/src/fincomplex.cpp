#include "l2inv/fincomplex.hpp"

#include "l2inv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace l2inv {
namespace {

constexpr double kCochainTol = 1e-12;

void check_degree(const FiniteComplex &c, int n) {
  if (n < 0 || n > c.top_degree())
    fail("DegreeOutOfRange", "degree " + std::to_string(n) + " outside [0, " +
                                 std::to_string(c.top_degree()) + "]");
}

Index count_restricted(const RVector &s, double lambda) {
  if (lambda > 0.0) return count_at_most(s, lambda);
  const double thr = zero_threshold(s.size() ? s.maxCoeff() : 0.0);
  return count_at_most(s, thr);
}

Index fhat(const RVector &s, double lambda) {
  return count_restricted(s, lambda) - count_restricted(s, 0.0);
}

double inverse_norm(const CMatrix &m, Index nonzero) {
  if (nonzero == 0) return 0.0;
  const RVector s = singular_values(m);
  return 1.0 / s(nonzero - 1);
}

} // namespace

FiniteComplex::FiniteComplex(std::vector<CMatrix> differentials) : diffs_(std::move(differentials)) {
  if (diffs_.empty()) {
    dims_ = {0};
    return;
  }
  dims_.resize(diffs_.size() + 1);
  dims_[0] = diffs_[0].cols();
  for (std::size_t n = 0; n < diffs_.size(); ++n) {
    if (diffs_[n].cols() != dims_[n])
      fail("ShapeMismatch", "differential " + std::to_string(n) + " has " +
                                std::to_string(diffs_[n].cols()) + " columns, expected " +
                                std::to_string(dims_[n]));
    if (!all_finite(diffs_[n]))
      fail("NonFiniteEntry", "differential " + std::to_string(n) + " has NaN/Inf entries");
    dims_[n + 1] = diffs_[n].rows();
  }
  for (std::size_t n = 0; n + 1 < diffs_.size(); ++n) {
    const double scale = spectral_norm(diffs_[n + 1]) * spectral_norm(diffs_[n]);
    const double comp = spectral_norm(diffs_[n + 1] * diffs_[n]);
    if (comp > kCochainTol * scale)
      fail("CochainViolation", "|c_" + std::to_string(n + 1) + " c_" + std::to_string(n) +
                                   "| = " + std::to_string(comp));
  }
}

FiniteComplex FiniteComplex::zero(const std::vector<Index> &dims) {
  if (dims.size() <= 1) {
    FiniteComplex c;
    c.dims_ = dims.empty() ? std::vector<Index>{0} : dims;
    return c;
  }
  std::vector<CMatrix> diffs;
  for (std::size_t n = 0; n + 1 < dims.size(); ++n)
    diffs.push_back(CMatrix::Zero(dims[n + 1], dims[n]));
  return FiniteComplex(std::move(diffs));
}

Index FiniteComplex::dim(int n) const {
  if (n < 0 || n > top_degree()) return 0;
  return dims_[static_cast<std::size_t>(n)];
}

CMatrix FiniteComplex::differential(int n) const {
  if (n >= 0 && n < static_cast<int>(diffs_.size())) return diffs_[static_cast<std::size_t>(n)];
  return CMatrix::Zero(dim(n + 1), dim(n));
}

FiniteComplex make_complex(std::vector<CMatrix> differentials) {
  return FiniteComplex(std::move(differentials));
}

FiniteComplex direct_sum(const FiniteComplex &a, const FiniteComplex &b) {
  const int top = std::max(a.top_degree(), b.top_degree());
  if (top == 0) return FiniteComplex::zero({a.dim(0) + b.dim(0)});
  std::vector<CMatrix> diffs;
  for (int n = 0; n < top; ++n) {
    const CMatrix da = a.differential(n);
    const CMatrix db = b.differential(n);
    CMatrix m = CMatrix::Zero(da.rows() + db.rows(), da.cols() + db.cols());
    m.topLeftCorner(da.rows(), da.cols()) = da;
    m.bottomRightCorner(db.rows(), db.cols()) = db;
    diffs.push_back(std::move(m));
  }
  return FiniteComplex(std::move(diffs));
}

CMatrix laplacian(const FiniteComplex &c, int n) {
  check_degree(c, n);
  const CMatrix out = c.differential(n);
  const CMatrix in = c.differential(n - 1);
  CMatrix lap = out.adjoint() * out + in * in.adjoint();
  // exact Hermitian symmetrisation of the rounding
  return 0.5 * (lap + lap.adjoint());
}

RVector restricted_singular_values(const FiniteComplex &c, int n) {
  check_degree(c, n);
  const Index k = c.dim(n) - numerical_rank(c.differential(n - 1));
  return singular_values(c.differential(n)).head(k);
}

DensityReport spectral_density(const FiniteComplex &c, int n, std::span<const double> lambdas) {
  const RVector s = restricted_singular_values(c, n);
  DensityReport r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double l : lambdas) {
    if (l < 0.0) fail("GridOutOfRange", "negative lambda");
    r.values.push_back(static_cast<double>(count_restricted(s, l)));
  }
  r.errors.assign(r.values.size(), 0.0);
  r.betti = static_cast<double>(count_restricted(s, 0.0));
  return r;
}

Index betti(const FiniteComplex &c, int n) {
  return count_restricted(restricted_singular_values(c, n), 0.0);
}

double novikov_shubin_finite(const FiniteComplex &c, int n) {
  check_degree(c, n);
  return kInfinityPlus;
}

double torsion_finite(const FiniteComplex &c) {
  double total = 0.0;
  for (int n = 1; n <= c.top_degree(); ++n) {
    const RVector ev = hermitian_eigenvalues(laplacian(c, n));
    if (ev.size() == 0) continue;
    const double thr = zero_threshold(ev.maxCoeff());
    double logdet = 0.0;
    for (Index i = 0; i < ev.size(); ++i)
      if (ev(i) > thr) logdet += std::log(ev(i));
    total += (n % 2 == 1 ? 1.0 : -1.0) * n * logdet;
  }
  return 0.5 * total;
}

SandwichReport sobolev_sandwich_check(const FiniteComplex &c, int p,
                                      std::span<const double> lambdas) {
  check_degree(c, p);
  const double top = 1.0 / std::sqrt(2.0);
  for (double l : lambdas)
    if (!(l > 0.0) || l > top * (1.0 + 1e-15))
      fail("GridOutOfRange", "sandwich grid must lie in (0, 1/sqrt(2)]");

  const CMatrix out = c.differential(p);
  const CMatrix in = c.differential(p - 1);
  const RVector derham = restricted_singular_values(c, p);

  // Graph-norm Gram matrix G = I + c^* c = L L^*; w = L^* v is an isometry
  // from (C_p, |.|_1) to (C_p, |.|), so the Sobolev operator is c L^{-*}.
  const Index dim = c.dim(p);
  const CMatrix gram = CMatrix::Identity(dim, dim) + out.adjoint() * out;
  const Eigen::LLT<CMatrix> llt(gram);
  const CMatrix lower = llt.matrixL();
  const CMatrix op = lower.adjoint()
                         .triangularView<Eigen::Upper>()
                         .solve<Eigen::OnTheRight>(out);
  const Index k = dim - numerical_rank(lower.adjoint() * in);
  const RVector sobolev = singular_values(op).head(k);

  SandwichReport r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double l : lambdas) {
    const Index a = count_restricted(derham, l);
    const Index b = count_restricted(sobolev, l);
    const Index s = count_restricted(derham, std::sqrt(2.0) * l);
    r.derham.push_back(a);
    r.sobolev.push_back(b);
    r.derham_scaled.push_back(s);
    if (!(a <= b && b <= s)) r.passed = false;
  }
  return r;
}

SesBoundReport ses_bound_check(const FiniteComplex &c, const FiniteComplex &d,
                               const FiniteComplex &e, const std::vector<CMatrix> &f,
                               const std::vector<CMatrix> &g, int n,
                               std::span<const double> lambdas) {
  const int top = std::max({c.top_degree(), d.top_degree(), e.top_degree()});
  if (n < 0 || n > top) fail("DegreeOutOfRange", "degree " + std::to_string(n));
  auto map_at = [](const std::vector<CMatrix> &maps, int k, Index rows, Index cols) {
    if (k >= 0 && k < static_cast<int>(maps.size())) return maps[static_cast<std::size_t>(k)];
    return CMatrix(CMatrix::Zero(rows, cols));
  };

  constexpr double tol = 1e-10;
  for (int k = 0; k <= top + 1; ++k) {
    const CMatrix fk = map_at(f, k, d.dim(k), c.dim(k));
    const CMatrix gk = map_at(g, k, e.dim(k), d.dim(k));
    if (fk.rows() != d.dim(k) || fk.cols() != c.dim(k) || gk.rows() != e.dim(k) ||
        gk.cols() != d.dim(k))
      fail("NotExact", "chain map shapes do not match at degree " + std::to_string(k));
    if (numerical_rank(fk) != c.dim(k))
      fail("NotExact", "f_" + std::to_string(k) + " is not injective");
    if (numerical_rank(gk) != e.dim(k))
      fail("NotExact", "g_" + std::to_string(k) + " is not surjective");
    if (c.dim(k) + e.dim(k) != d.dim(k))
      fail("NotExact", "dimensions do not add up at degree " + std::to_string(k));
    const double scale = 1.0 + spectral_norm(gk) * spectral_norm(fk);
    if (spectral_norm(gk * fk) > tol * scale)
      fail("NotExact", "g f != 0 at degree " + std::to_string(k));
    if (k <= top) {
      const CMatrix fk1 = map_at(f, k + 1, d.dim(k + 1), c.dim(k + 1));
      const CMatrix gk1 = map_at(g, k + 1, e.dim(k + 1), d.dim(k + 1));
      const CMatrix lhs_f = d.differential(k) * fk - fk1 * c.differential(k);
      const CMatrix lhs_g = e.differential(k) * gk - gk1 * d.differential(k);
      const double sf = 1.0 + spectral_norm(d.differential(k)) * spectral_norm(fk) +
                        spectral_norm(fk1) * spectral_norm(c.differential(k));
      const double sg = 1.0 + spectral_norm(e.differential(k)) * spectral_norm(gk) +
                        spectral_norm(gk1) * spectral_norm(d.differential(k));
      if (spectral_norm(lhs_f) > tol * sf || spectral_norm(lhs_g) > tol * sg)
        fail("NotExact", "f or g is not a chain map at degree " + std::to_string(k));
    }
  }

  const bool e_ok = n <= e.top_degree() ? betti(e, n) == 0 : true;
  const bool c_ok = n + 1 <= c.top_degree() ? betti(c, n + 1) == 0 : true;
  if (!e_ok && !c_ok)
    fail("HypothesisViolated", "need b_n(E) = 0 or b_{n+1}(C) = 0");

  const CMatrix fn = map_at(f, n, d.dim(n), c.dim(n));
  const CMatrix fn1 = map_at(f, n + 1, d.dim(n + 1), c.dim(n + 1));
  const CMatrix gn = map_at(g, n, e.dim(n), d.dim(n));
  const CMatrix gn1 = map_at(g, n + 1, e.dim(n + 1), d.dim(n + 1));
  const double dn = spectral_norm(d.differential(n));

  SesBoundReport r;
  r.alpha_c = std::sqrt(inverse_norm(fn1, c.dim(n + 1))) * spectral_norm(fn);
  r.alpha_e = (4.0 + 2.0 * dn) * spectral_norm(gn1) * inverse_norm(gn, e.dim(n));
  r.alpha_1 = 1.0 / std::sqrt(4.0 + 2.0 * dn);

  auto spectrum = [](const FiniteComplex &x, int k) {
    return k <= x.top_degree() ? restricted_singular_values(x, k) : RVector();
  };
  const RVector sc = spectrum(c, n);
  const RVector sd = spectrum(d, n);
  const RVector se = spectrum(e, n);
  for (double l : lambdas) {
    if (l < 0.0) fail("GridOutOfRange", "negative lambda");
    if (!(l < r.alpha_1)) continue;
    const Index lhs = fhat(sd, l);
    const Index rhs = fhat(sc, r.alpha_c * std::sqrt(l)) + fhat(se, r.alpha_e * std::sqrt(l));
    r.lambdas.push_back(l);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    if (lhs > rhs) r.passed = false;
  }
  return r;
}

DilatationReport homotopy_dilatation_check(const FiniteComplex &c, const FiniteComplex &d,
                                           std::span<const double> lambdas) {
  const int top = std::max(c.top_degree(), d.top_degree());
  auto spectrum = [](const FiniteComplex &x, int k) {
    return k <= x.top_degree() ? restricted_singular_values(x, k) : RVector();
  };
  DilatationReport r;
  std::vector<RVector> sc, sd;
  for (int n = 0; n <= top; ++n) {
    sc.push_back(spectrum(c, n));
    sd.push_back(spectrum(d, n));
    r.betti_c.push_back(count_restricted(sc.back(), 0.0));
    r.betti_d.push_back(count_restricted(sd.back(), 0.0));
  }
  if (r.betti_c != r.betti_d)
    fail("NotHomotopyEquivalent", "L2-Betti numbers differ");

  for (int k = 0; k <= 20 && !r.witness; ++k) {
    const double factor = std::ldexp(1.0, k);
    bool ok = true;
    for (int n = 0; n <= top && ok; ++n)
      for (double l : lambdas) {
        const Index lo = count_restricted(sc[n], l / factor);
        const Index mid = count_restricted(sd[n], l);
        const Index hi = count_restricted(sc[n], l * factor);
        if (lo > mid || mid > hi) {
          ok = false;
          break;
        }
      }
    if (ok) r.witness = factor;
  }
  r.passed = r.witness.has_value();
  return r;
}

DensityIdentityReport density_identity_check(const FiniteComplex &c, int p,
                                             std::span<const double> lambdas) {
  check_degree(c, p);
  if (betti(c, p) != 0 || (p > 0 && betti(c, p - 1) != 0))
    fail("HypothesisViolated", "density identity needs trivial cohomology in degrees p, p-1");
  const RVector ev = hermitian_eigenvalues(laplacian(c, p));
  const RVector sp = restricted_singular_values(c, p);
  const RVector sq = p > 0 ? restricted_singular_values(c, p - 1) : RVector();
  DensityIdentityReport r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double l : lambdas) {
    if (l < 0.0) fail("GridOutOfRange", "negative lambda");
    const Index lhs = count_restricted(ev, l);
    const Index rhs = count_restricted(sp, std::sqrt(l)) + count_restricted(sq, std::sqrt(l));
    r.laplacian_counts.push_back(lhs);
    r.level_sum.push_back(rhs);
    if (lhs != rhs) r.passed = false;
  }
  return r;
}

} // namespace l2inv
