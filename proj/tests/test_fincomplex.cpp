#include "l2inv/error.hpp"
#include "l2inv/fincomplex.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace l2inv;
using l2inv::test::Rng;

namespace {

std::vector<double> small_grid() {
  std::vector<double> l;
  for (int j = 0; j <= 30; ++j) l.push_back(1e-6 * std::pow(10.0, j / 6.0));
  return l;
}

CMatrix scalar(double x) { return CMatrix::Constant(1, 1, Complex(x)); }

CMatrix diag(std::initializer_list<double> d) {
  CMatrix m = CMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) m(i, i) = x, ++i;
  return m;
}

// Singular values of c_n on the orthogonal complement of im c_{n-1}, with the
// complement taken from the eigenvectors of c_{n-1} c_{n-1}^*.
Eigen::VectorXd projected_singular_values(const FiniteComplex &x, int n) {
  const CMatrix in = x.differential(n - 1);
  const CMatrix out = x.differential(n);
  const Index dim = x.dim(n);
  CMatrix basis;
  if (in.cols() == 0) {
    basis = CMatrix::Identity(dim, dim);
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(in * in.adjoint());
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Index> keep;
    for (Index i = 0; i < dim; ++i)
      if (std::abs(es.eigenvalues()(i)) <= 1e-10 * (1.0 + top)) keep.push_back(i);
    basis.resize(dim, static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      basis.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]).normalized();
    // Eigenvectors of a degenerate eigenvalue need not be orthogonal.
    basis = Eigen::HouseholderQR<CMatrix>(basis).householderQ() *
            CMatrix::Identity(dim, basis.cols());
  }
  const CMatrix op = out * basis;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(op.cols());
  if (op.rows() > 0 && op.cols() > 0) {
    const Eigen::VectorXd sv = Eigen::JacobiSVD<CMatrix>(op).singularValues();
    s.head(sv.size()) = sv;
  }
  return s;
}

Index count_le(const Eigen::VectorXd &s, double l) {
  Index k = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) <= l) ++k;
  return k;
}

} // namespace

TEST(FiniteComplexMake, EmptyComplexHasZeroDims) {
  const FiniteComplex x = make_complex({});
  for (Index d : x.dims()) EXPECT_EQ(d, 0);
}

TEST(FiniteComplexMake, SingleMapGivesTwoDegrees) {
  const FiniteComplex x = make_complex({scalar(2.0)});
  EXPECT_EQ(x.top_degree(), 1);
  EXPECT_EQ(x.dim(0), 1);
  EXPECT_EQ(x.dim(1), 1);
}

TEST(FiniteComplexMake, RejectsCochainViolation) {
  try {
    make_complex({scalar(1.0), scalar(1.0)});
    FAIL() << "expected CochainViolation";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "CochainViolation");
  }
}

TEST(FiniteComplexMake, RejectsShapeMismatch) {
  try {
    make_complex({CMatrix::Zero(2, 1), CMatrix::Zero(1, 3)});
    FAIL() << "expected ShapeMismatch";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "ShapeMismatch");
  }
}

TEST(FiniteComplexMake, RejectsNonFiniteEntries) {
  EXPECT_THROW(make_complex({scalar(std::nan(""))}), Error);
}

TEST(FiniteLaplacian, ZeroComplexGivesZeroMatrix) {
  const FiniteComplex x = FiniteComplex::zero({2, 3});
  EXPECT_EQ(laplacian(x, 0).norm(), 0.0);
  EXPECT_EQ(laplacian(x, 1).norm(), 0.0);
}

TEST(FiniteLaplacian, IdentityDifferential) {
  const FiniteComplex x = make_complex({scalar(1.0)});
  EXPECT_NEAR(laplacian(x, 0)(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(laplacian(x, 1)(0, 0).real(), 1.0, 1e-15);
}

TEST(FiniteLaplacian, RejectsDegreeOutOfRange) {
  const FiniteComplex x = make_complex({scalar(1.0)});
  EXPECT_THROW(laplacian(x, 2), Error);
  EXPECT_THROW(laplacian(x, -1), Error);
}

TEST(FiniteLaplacian, MatchesDirectEvaluationAndIsHermitian) {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 2, false);
    for (int n = 0; n <= 2; ++n) {
      CMatrix direct = CMatrix::Zero(x.dim(n), x.dim(n));
      if (n < 2) direct += x.differentials()[n].adjoint() * x.differentials()[n];
      if (n > 0) direct += x.differentials()[n - 1] * x.differentials()[n - 1].adjoint();
      const CMatrix lap = laplacian(x, n);
      EXPECT_LE((lap - direct).norm(), 1e-12 * (1.0 + direct.norm()));
      EXPECT_LE((lap - lap.adjoint()).norm(), 1e-12 * (1.0 + lap.norm()));
    }
  }
}

TEST(FiniteLaplacian, KernelIsIntersectionOfKernels) {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 3, false);
    for (int n = 0; n <= 3; ++n) {
      const CMatrix stacked = [&] {
        CMatrix out(x.dim(n + 1) + x.dim(n - 1), x.dim(n));
        out << x.differential(n), x.differential(n - 1).adjoint();
        return out;
      }();
      const CMatrix harm = kernel_basis(laplacian(x, n));
      EXPECT_EQ(harm.cols(), x.dim(n) - numerical_rank(stacked));
      if (harm.cols() > 0) {
        EXPECT_LE((stacked * harm).norm(), 1e-8);
      }
    }
  }
}

TEST(FiniteDensity, DiagonalSingularValues) {
  const FiniteComplex x = make_complex({diag({0.5, 2.0})});
  const std::vector<double> l{0.4, 0.5, 2.0};
  const DensityReport r = spectral_density(x, 0, l);
  EXPECT_EQ(r.values, (std::vector<double>{0.0, 1.0, 2.0}));
  EXPECT_EQ(r.betti, 0.0);
}

TEST(FiniteDensity, IdentityDifferentialStepsAtOne) {
  const FiniteComplex x = make_complex({CMatrix::Identity(3, 3)});
  const std::vector<double> l{0.0, 0.5, 0.999, 1.0, 4.0};
  EXPECT_EQ(spectral_density(x, 0, l).values, (std::vector<double>{0, 0, 0, 3, 3}));
}

TEST(FiniteDensity, MatchesProjectedDecomposition) {
  Rng rng(13);
  for (int k = 0; k < 30; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 3, false);
    for (int n = 0; n <= 3; ++n) {
      const Eigen::VectorXd s = projected_singular_values(x, n);
      std::vector<double> grid;
      for (int j = 0; j <= 40; ++j) grid.push_back(0.1 * j);
      // Keep clear of the jumps.
      std::erase_if(grid, [&](double l) {
        for (Index i = 0; i < s.size(); ++i)
          if (std::abs(s(i) - l) < 1e-8 && l > 0) return true;
        return false;
      });
      const DensityReport r = spectral_density(x, n, grid);
      for (std::size_t j = 0; j < grid.size(); ++j)
        EXPECT_EQ(r.values[j], static_cast<double>(count_le(s, std::max(grid[j], 1e-9))))
            << "n=" << n << " lambda=" << grid[j];
      for (std::size_t j = 1; j < grid.size(); ++j) EXPECT_LE(r.values[j - 1], r.values[j]);
    }
  }
}

TEST(FiniteBetti, ZeroMapKeepsEverything) {
  const FiniteComplex x = make_complex({CMatrix::Zero(2, 2)});
  EXPECT_EQ(betti(x, 0), 2);
  EXPECT_EQ(betti(x, 1), 2);
}

TEST(FiniteBetti, IdentityMapKillsEverything) {
  const FiniteComplex x = make_complex({scalar(1.0)});
  EXPECT_EQ(betti(x, 0), 0);
  EXPECT_EQ(betti(x, 1), 0);
}

TEST(FiniteBetti, EqualsLaplacianKernelDimension) {
  Rng rng(14);
  for (int k = 0; k < 30; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 3, false);
    for (int n = 0; n <= 3; ++n) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(laplacian(x, n), Eigen::EigenvaluesOnly);
      Index zeros = 0;
      if (x.dim(n) > 0) {
        const double top = es.eigenvalues().cwiseAbs().maxCoeff();
        for (Index i = 0; i < x.dim(n); ++i)
          if (std::abs(es.eigenvalues()(i)) <= 1e-10 * (1.0 + top)) ++zeros;
      }
      EXPECT_EQ(betti(x, n), zeros);
    }
  }
}

TEST(FiniteBetti, NovikovShubinIsInfinityPlus) {
  EXPECT_EQ(novikov_shubin_finite(make_complex({scalar(1.0)}), 0), kInfinityPlus);
}

TEST(FiniteTorsion, ScalarTwo) {
  EXPECT_NEAR(torsion_finite(make_complex({scalar(2.0)})), std::log(2.0), 1e-14);
}

TEST(FiniteTorsion, ZeroComplex) {
  EXPECT_EQ(torsion_finite(FiniteComplex::zero({3, 2, 1})), 0.0);
}

TEST(FiniteTorsion, InvertibleMapGivesLogAbsDet) {
  Rng rng(15);
  for (int k = 0; k < 20; ++k) {
    const CMatrix a = l2inv::test::gaussian(rng, 5, 5);
    // Independent determinant via partial-pivot LU.
    const double expected = std::log(std::abs(Eigen::PartialPivLU<CMatrix>(a).determinant()));
    EXPECT_NEAR(torsion_finite(make_complex({a})), expected, 1e-9);
  }
}

TEST(FiniteTorsion, AdditiveOnDirectSums) {
  Rng rng(16);
  for (int k = 0; k < 20; ++k) {
    const FiniteComplex a = l2inv::test::random_complex(rng, l2inv::test::uniform_int(rng, 1, 3), false);
    const FiniteComplex b = l2inv::test::random_complex(rng, l2inv::test::uniform_int(rng, 1, 3), false);
    EXPECT_NEAR(torsion_finite(direct_sum(a, b)), torsion_finite(a) + torsion_finite(b), 1e-9);
  }
}

TEST(FiniteTorsion, InvariantUnderUnitaryBasisChange) {
  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    const FiniteComplex a = l2inv::test::random_complex(rng, 3, false);
    EXPECT_NEAR(torsion_finite(l2inv::test::rotated(rng, a)), torsion_finite(a), 1e-9);
  }
}

TEST(FiniteSandwich, DiagonalDifferential) {
  // Level-1 complex 0 -> C^2 -diag(0.1, 0.3)-> C^2 -> 0 read at p = 0. The
  // graph norm turns sigma into sigma / sqrt(1 + sigma^2).
  const FiniteComplex x = make_complex({diag({0.1, 0.3})});
  std::vector<double> l;
  for (int j = 1; j <= 70; ++j) l.push_back(0.01 * j);
  const SandwichReport r = sobolev_sandwich_check(x, 0, l);
  EXPECT_TRUE(r.passed);
  for (std::size_t j = 0; j < l.size(); ++j) {
    auto f = [](double t) { return (0.1 <= t) + (0.3 <= t); };
    auto g = [](double t) {
      return (0.1 / std::sqrt(1.01) <= t) + (0.3 / std::sqrt(1.09) <= t);
    };
    EXPECT_EQ(r.derham[j], f(l[j]));
    EXPECT_EQ(r.sobolev[j], g(l[j]));
    EXPECT_EQ(r.derham_scaled[j], f(std::sqrt(2.0) * l[j]));
  }
}

TEST(FiniteSandwich, ZeroDifferentialAllEqual) {
  const FiniteComplex x = make_complex({CMatrix::Zero(2, 3)});
  const std::vector<double> l{0.1, 0.3, 0.7};
  const SandwichReport r = sobolev_sandwich_check(x, 0, l);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.derham, r.sobolev);
  EXPECT_EQ(r.sobolev, r.derham_scaled);
}

TEST(FiniteSandwich, RejectsGridOutsideRange) {
  const FiniteComplex x = make_complex({scalar(1.0)});
  const std::vector<double> l{0.8};
  EXPECT_THROW(sobolev_sandwich_check(x, 0, l), Error);
}

TEST(FiniteSandwich, RandomComplexesPass) {
  Rng rng(18);
  for (int k = 0; k < 50; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 3, false);
    std::vector<double> l;
    for (int j = 1; j <= 20; ++j) l.push_back(j / (20.0 * std::sqrt(2.0)));
    const int p = l2inv::test::uniform_int(rng, 0, 3);
    EXPECT_TRUE(sobolev_sandwich_check(x, p, l).passed) << "seed index " << k;
  }
}

namespace {

struct Triple {
  FiniteComplex c, d, e;
  std::vector<CMatrix> f, g;
};

// D = C + E with an off-diagonal block h_n : E_n -> C_{n+1} in its
// differential; f is the inclusion and g the projection. d^2 = 0 needs
// c h_n + h_{n+1} e = 0, which h_n = c_n k_n - k_{n+1} e_n satisfies.
Triple exact_triple(Rng &rng, const FiniteComplex &c, const FiniteComplex &e) {
  const int top = std::max(c.top_degree(), e.top_degree());
  Triple t{c, FiniteComplex(), e, {}, {}};
  std::vector<CMatrix> diffs;
  std::vector<CMatrix> k;
  for (int n = 0; n <= top + 1; ++n) k.push_back(l2inv::test::gaussian(rng, c.dim(n), e.dim(n)));
  for (int n = 0; n < top; ++n) {
    const Index nc = c.dim(n), ne = e.dim(n), mc = c.dim(n + 1), me = e.dim(n + 1);
    CMatrix dn = CMatrix::Zero(mc + me, nc + ne);
    dn.topLeftCorner(mc, nc) = c.differential(n);
    dn.bottomRightCorner(me, ne) = e.differential(n);
    dn.topRightCorner(mc, ne) = c.differential(n) * k[n] - k[n + 1] * e.differential(n);
    diffs.push_back(dn);
  }
  t.d = FiniteComplex(diffs);
  for (int n = 0; n <= top; ++n) {
    const Index nc = c.dim(n), ne = e.dim(n);
    CMatrix incl = CMatrix::Zero(nc + ne, nc);
    incl.topRows(nc) = CMatrix::Identity(nc, nc);
    CMatrix proj = CMatrix::Zero(ne, nc + ne);
    proj.rightCols(ne) = CMatrix::Identity(ne, ne);
    t.f.push_back(incl);
    t.g.push_back(proj);
  }
  return t;
}

} // namespace

TEST(FiniteExactSequence, SplitSumPasses) {
  Rng rng(19);
  const FiniteComplex c = l2inv::test::random_complex(rng, 2, false);
  const FiniteComplex e = l2inv::test::random_complex(rng, 2, true);
  const FiniteComplex d = direct_sum(c, e);
  std::vector<CMatrix> f, g;
  for (int n = 0; n <= 2; ++n) {
    CMatrix incl = CMatrix::Zero(d.dim(n), c.dim(n));
    incl.topRows(c.dim(n)) = CMatrix::Identity(c.dim(n), c.dim(n));
    CMatrix proj = CMatrix::Zero(e.dim(n), d.dim(n));
    proj.rightCols(e.dim(n)) = CMatrix::Identity(e.dim(n), e.dim(n));
    f.push_back(incl);
    g.push_back(proj);
  }
  const std::vector<double> l = small_grid();
  for (int n = 0; n <= 2; ++n) {
    const SesBoundReport r = ses_bound_check(c, d, e, f, g, n, l);
    EXPECT_TRUE(r.passed);
    if (n < 2) {
      EXPECT_NEAR(r.alpha_c, 1.0, 1e-12);
      EXPECT_GE(r.alpha_e, 4.0);
    }
  }
}

TEST(FiniteExactSequence, ZeroSubcomplexReducesToQuotient) {
  Rng rng(20);
  const FiniteComplex e = l2inv::test::random_complex(rng, 2, true);
  const FiniteComplex c = FiniteComplex::zero({0, 0, 0});
  std::vector<CMatrix> f, g;
  for (int n = 0; n <= 2; ++n) {
    f.push_back(CMatrix::Zero(e.dim(n), 0));
    g.push_back(CMatrix::Identity(e.dim(n), e.dim(n)));
  }
  for (int n = 0; n <= 2; ++n) {
    const SesBoundReport r = ses_bound_check(c, e, e, f, g, n, small_grid());
    EXPECT_TRUE(r.passed);
    for (std::size_t j = 0; j < r.lambdas.size(); ++j) {
      const DensityReport lhs = spectral_density(e, n, std::vector<double>{r.lambdas[j]});
      EXPECT_EQ(static_cast<double>(r.lhs[j]), lhs.values[0] - lhs.betti);
    }
  }
}

TEST(FiniteExactSequence, RandomTriplesPass) {
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    const int top = l2inv::test::uniform_int(rng, 1, 3);
    const FiniteComplex c = l2inv::test::random_complex(rng, top, false);
    const FiniteComplex e = l2inv::test::random_complex(rng, top, true);
    const Triple t = exact_triple(rng, c, e);
    const int n = l2inv::test::uniform_int(rng, 0, top);
    const SesBoundReport r = ses_bound_check(t.c, t.d, t.e, t.f, t.g, n, small_grid());
    EXPECT_TRUE(r.passed) << "triple " << k;
    EXPECT_FALSE(r.lambdas.empty());
  }
}

TEST(FiniteExactSequence, RejectsNonExactMaps) {
  const FiniteComplex c = make_complex({scalar(1.0)});
  std::vector<CMatrix> f{scalar(1.0), scalar(1.0)};
  std::vector<CMatrix> g{scalar(1.0), scalar(1.0)};
  try {
    ses_bound_check(c, c, c, f, g, 0, small_grid());
    FAIL() << "expected NotExact";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "NotExact");
  }
}

TEST(FiniteExactSequence, RejectsWhenHypothesisFails) {
  // C = E = 0 -> C -0-> C -> 0: both b_0(E) and b_1(C) are nonzero.
  const FiniteComplex c = make_complex({CMatrix::Zero(1, 1)});
  const FiniteComplex d = direct_sum(c, c);
  std::vector<CMatrix> f, g;
  for (int n = 0; n <= 1; ++n) {
    CMatrix incl = CMatrix::Zero(2, 1);
    incl(0, 0) = 1.0;
    CMatrix proj = CMatrix::Zero(1, 2);
    proj(0, 1) = 1.0;
    f.push_back(incl);
    g.push_back(proj);
  }
  try {
    ses_bound_check(c, d, c, f, g, 0, small_grid());
    FAIL() << "expected HypothesisViolated";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "HypothesisViolated");
  }
}

namespace {

// 0 -> C^k -1-> C^k -> 0 placed in degrees n, n+1 of a complex of length top.
FiniteComplex elementary(int n, Index k, int top) {
  std::vector<Index> dims(static_cast<std::size_t>(top + 1), 0);
  dims[n] = k;
  dims[n + 1] = k;
  std::vector<CMatrix> diffs;
  for (int m = 0; m < top; ++m) {
    CMatrix c = CMatrix::Zero(dims[m + 1], dims[m]);
    if (m == n) c = CMatrix::Identity(k, k);
    diffs.push_back(c);
  }
  return FiniteComplex(diffs);
}

} // namespace

TEST(FiniteDilatation, IdentityWitnessIsOne) {
  Rng rng(22);
  const FiniteComplex x = l2inv::test::random_complex(rng, 3, false);
  const DilatationReport r = homotopy_dilatation_check(x, x, small_grid());
  ASSERT_TRUE(r.passed);
  EXPECT_EQ(*r.witness, 1.0);
}

TEST(FiniteDilatation, ContractibleSummandAddsNoSmallSpectrum) {
  Rng rng(23);
  const FiniteComplex x = l2inv::test::random_complex(rng, 2, false);
  const FiniteComplex d = direct_sum(x, elementary(0, 1, 2));
  const DilatationReport r = homotopy_dilatation_check(x, d, small_grid());
  EXPECT_EQ(r.betti_c, r.betti_d);
  ASSERT_TRUE(r.passed);
  EXPECT_EQ(*r.witness, 1.0);
}

TEST(FiniteDilatation, RandomStabilizationsPass) {
  Rng rng(24);
  for (int k = 0; k < 50; ++k) {
    const int top = l2inv::test::uniform_int(rng, 1, 3);
    const FiniteComplex x = l2inv::test::random_complex(rng, top, false);
    const int n = l2inv::test::uniform_int(rng, 0, top - 1);
    const FiniteComplex d = l2inv::test::rotated(
        rng, direct_sum(x, elementary(n, l2inv::test::uniform_int(rng, 1, 2), top)));
    EXPECT_TRUE(homotopy_dilatation_check(x, d, small_grid()).passed) << "stabilization " << k;
  }
}

TEST(FiniteDilatation, BettiMismatchThrows) {
  const FiniteComplex a = make_complex({scalar(1.0)});
  const FiniteComplex b = make_complex({CMatrix::Zero(1, 1)});
  try {
    homotopy_dilatation_check(a, b, small_grid());
    FAIL() << "expected NotHomotopyEquivalent";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "NotHomotopyEquivalent");
  }
}

TEST(FiniteDensityIdentity, IdentityDifferentialStepsAtOne) {
  const FiniteComplex x = make_complex({scalar(1.0)});
  const std::vector<double> l{0.5, 0.99, 1.0, 2.0};
  const DensityIdentityReport r = density_identity_check(x, 1, l);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.laplacian_counts, (std::vector<Index>{0, 0, 1, 1}));
}

TEST(FiniteDensityIdentity, AcyclicRandomComplexes) {
  Rng rng(25);
  std::vector<double> l;
  for (int j = 0; j <= 60; ++j) l.push_back(1e-4 * std::pow(10.0, j / 12.0));
  for (int k = 0; k < 50; ++k) {
    const FiniteComplex x = l2inv::test::random_complex(rng, 2, true);
    for (int p = 0; p <= 2; ++p)
      EXPECT_TRUE(density_identity_check(x, p, l).passed) << "complex " << k << " p=" << p;
  }
}

TEST(FiniteDensityIdentity, RejectsNontrivialCohomology) {
  const FiniteComplex x = make_complex({CMatrix::Zero(1, 1)});
  const std::vector<double> l{0.5};
  try {
    density_identity_check(x, 1, l);
    FAIL() << "expected HypothesisViolated";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "HypothesisViolated");
  }
}
