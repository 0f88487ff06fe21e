#include "l2inv/cusp.hpp"
#include "l2inv/error.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

using namespace l2inv;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

std::string kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  return "";
}

CuspModel unit3() { return make_cusp_model(3, {1.0}, 0.0); }

// integral of Vol(G) e^{-(n-1)t} over [r, s]
double slab_oracle(const CuspModel &m, double r, double s) {
  double g = 0.0;
  for (double v : m.cross_sections) g += v;
  auto f = [&](double t) { return g * std::exp(-(m.n - 1) * t); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, r, s, 15, 1e-14);
}

LedgerRow row(double r, double an_rho, double an_triv, double top_triv, double dim) {
  return LedgerRow{r, an_rho, an_triv, top_triv, dim};
}

AnomalyLedger ledger_of(const std::function<double(double)> &f, std::vector<double> rs) {
  AnomalyLedger l;
  for (double r : rs) l.rows.push_back(row(r, f(r), 0.0, 0.0, 1.0));
  return l;
}

} // namespace

TEST(CuspVolume, FullCuspOfUnitSection) { EXPECT_NEAR(vol_slab(unit3(), 0.0, inf), 0.5, 1e-15); }

TEST(CuspVolume, SlabsAreAdditive) {
  const CuspModel m = make_cusp_model(5, {0.7, 1.3, 2.0}, 4.0);
  EXPECT_NEAR(vol_slab(m, 0.5, 1.2) + vol_slab(m, 1.2, 3.0), vol_slab(m, 0.5, 3.0), 1e-14);
  EXPECT_NEAR(vol_slab(m, 0.0, 2.0) + vol_slab(m, 2.0, inf), vol_slab(m, 0.0, inf), 1e-14);
}

TEST(CuspVolume, UnitSlabScalesWithWarpFactor) {
  const CuspModel m = unit3();
  for (double r : {1.0, 2.5, 6.0, 12.0})
    EXPECT_NEAR(vol_slab(m, r - 1.0, r) / vol_slab(m, 0.0, 1.0), std::exp(-2.0 * r + 2.0), 1e-13 * std::exp(-2.0 * r + 2.0));
  EXPECT_DOUBLE_EQ(warp_factor(m, 3.0), std::exp(-4.0));
}

TEST(CuspVolume, SlabMatchesQuadrature) {
  for (const CuspModel &m : {unit3(), make_cusp_model(3, {0.25, 4.0}, 1.0), make_cusp_model(7, {2.0}, 0.0)})
    for (auto [r, s] : {std::pair{0.0, 1.0}, std::pair{0.3, 2.7}, std::pair{4.0, 9.0}}) {
      const double exact = slab_oracle(m, r, s);
      EXPECT_NEAR(vol_slab(m, r, s), exact, 1e-12 * (1.0 + exact));
    }
}

TEST(CuspVolume, BoundaryArea) {
  const CuspModel m = unit3();
  EXPECT_DOUBLE_EQ(vol_boundary(m, 0.0), 1.0);
  EXPECT_NEAR(vol_boundary(m, 1.0), 0.1353352832366127, 1e-15);
  for (double r : {2.0, 5.0})
    EXPECT_NEAR(vol_boundary(m, r) / vol_boundary(m, 1.0), std::exp(-2.0 * r + 2.0), 1e-14);
}

TEST(CuspVolume, ThickPartGrowsToTotal) {
  const CuspModel m = make_cusp_model(3, {1.0, 2.0}, 3.0);
  double prev = vol_thick(m, 0.0);
  EXPECT_DOUBLE_EQ(prev, 3.0);
  for (double r = 0.5; r <= 20.0; r += 0.5) {
    const double v = vol_thick(m, r);
    if (r <= 10.0)
      EXPECT_GT(v, prev);
    else
      EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(prev, total_volume(m), 1e-15 * total_volume(m) + 1e-16);
  EXPECT_DOUBLE_EQ(total_volume(m), 4.5);
}

TEST(CuspVolume, RangeErrors) {
  const CuspModel m = unit3();
  EXPECT_EQ(kind_of([&] { vol_slab(m, 2.0, 1.0); }), "BadRange");
  EXPECT_EQ(kind_of([&] { vol_slab(m, -1.0, 1.0); }), "BadRange");
  EXPECT_EQ(kind_of([&] { vol_slab(m, 1.0, 1.0); }), "BadRange");
  EXPECT_EQ(kind_of([&] { vol_boundary(m, -0.5); }), "BadRange");
  EXPECT_EQ(kind_of([] { make_cusp_model(3, {}, 0.0); }), "InvalidArgument");
  EXPECT_EQ(kind_of([] { make_cusp_model(3, {-1.0}, 0.0); }), "InvalidArgument");
  EXPECT_EQ(kind_of([] { make_cusp_model(4, {1.0}, 0.0); }), "NonOddDimension");
}

TEST(SurfaceExample, AreaMatchesFundamentalDomain) {
  const CuspModel m = h2_example();
  EXPECT_EQ(m.k(), 3);
  // {|x| <= 1, |z - 1/2| >= 1/2, |z + 1/2| >= 1/2}: the y integral of 1/y^2 above
  // the arcs leaves 2 * int_0^1 dx / sqrt(x (1 - x))
  boost::math::quadrature::tanh_sinh<double> ts;
  // xc is the signed distance to the nearer endpoint, which keeps x (1 - x) accurate there
  const double area = 2.0 * ts.integrate(
                                [](double, double xc) {
                                  const double near = std::abs(xc);
                                  return 1.0 / std::sqrt(near * (1.0 - near));
                                },
                                0.0, 1.0);
  EXPECT_NEAR(area, 2.0 * pi, 1e-10);
  EXPECT_NEAR(total_volume(m), area, 1e-10);
}

TEST(SurfaceExample, RejectedForTorsion) {
  EXPECT_EQ(kind_of([] { require_odd_dimension(h2_example()); }), "NonOddDimension");
  EXPECT_EQ(kind_of([] { require_odd_dimension(make_cusp_model(3, {1.0}, 1.0)); }), "");
}

TEST(Anomaly, ZeroAnomalyLeavesRho) { EXPECT_DOUBLE_EQ(anomaly_combine(row(1.0, 0.37, 0.5, 0.5, 3.0)), 0.37); }

TEST(Anomaly, ScalesWithDimension) {
  EXPECT_NEAR(anomaly_combine(row(1.0, 1.0, 0.4, 0.5, 2.0)), 1.2, 1e-15);
}

TEST(Anomaly, TrivialRepresentationGivesTopological) {
  EXPECT_NEAR(anomaly_combine(row(1.0, 0.8, 0.8, -0.25, 1.0)), -0.25, 1e-15);
}

TEST(Anomaly, MissingFields) {
  LedgerRow r = row(1.0, 0.0, 0.0, 0.0, 1.0);
  r.log_top_trivial.reset();
  EXPECT_EQ(kind_of([&] { anomaly_combine(r); }), "MissingField");
  r = row(1.0, 0.0, 0.0, 0.0, 1.0);
  r.dim_rho.reset();
  EXPECT_EQ(kind_of([&] { anomaly_combine(r); }), "MissingField");
}

TEST(Convergence, ExponentialLedger) {
  const auto rep = convergence_report(ledger_of([](double r) { return 1.0 + std::exp(-2.0 * r); }, {1, 2, 3, 4, 5, 6}));
  EXPECT_NEAR(rep.limit, 1.0, 1e-8);
  EXPECT_NEAR(rep.rate, 2.0, 1e-6);
  EXPECT_NEAR(rep.amplitude, std::exp(-2.0), 1e-8);
  EXPECT_LT(rep.rms_residual, 1e-10);
  EXPECT_TRUE(rep.monotone);
  ASSERT_EQ(rep.fitted.size(), 6u);
}

TEST(Convergence, ConstantLedger) {
  const auto rep = convergence_report(ledger_of([](double) { return -0.75; }, {1, 2, 3}));
  EXPECT_EQ(rep.limit, -0.75);
  EXPECT_TRUE(std::isinf(rep.rate));
}

TEST(Convergence, OscillatingLedgerIsNotMonotone) {
  const auto rep = convergence_report(
      ledger_of([](double r) { return 2.0 + std::exp(-r) * (1.0 + 0.5 * std::cos(3.0 * r)); }, {1, 2, 3, 4, 5, 6, 7}));
  EXPECT_FALSE(rep.monotone);
}

TEST(Convergence, Errors) {
  EXPECT_EQ(kind_of([] { convergence_report(ledger_of([](double r) { return r; }, {1, 2})); }), "InsufficientData");
  EXPECT_EQ(kind_of([] { convergence_report(ledger_of([](double r) { return r; }, {1, 3, 2})); }), "BadRange");
  AnomalyLedger l = ledger_of([](double r) { return r; }, {1, 2, 3});
  l.rows[1].log_an_rho.reset();
  EXPECT_EQ(kind_of([&] { convergence_report(l); }), "MissingField");
}

TEST(Ledger, ReadsCsv) {
  std::istringstream in("# anomaly ledger\nR,logTan_rho,logTan_triv,logTtop_triv,dim_rho\n1,0.5,0.1,0.2,2\n2,0.45,,0.2,2\n");
  const AnomalyLedger l = read_ledger_csv(in);
  ASSERT_EQ(l.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(l.rows[0].r, 1.0);
  EXPECT_NEAR(anomaly_combine(l.rows[0]), 0.7, 1e-15);
  EXPECT_FALSE(l.rows[1].log_an_trivial.has_value());
  EXPECT_DOUBLE_EQ(*l.rows[1].log_an_rho, 0.45);
}

TEST(Ledger, ReportCsvRoundTrip) {
  const auto rep = convergence_report(ledger_of([](double r) { return 1.0 + std::exp(-r); }, {1, 2, 3, 4}));
  std::ostringstream out;
  write_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "R,value,fitted,residual");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Ledger, BadTables) {
  std::istringstream empty("");
  EXPECT_EQ(kind_of([&] { read_ledger_csv(empty); }), "BadTable");
  std::istringstream no_r("x,logTan_rho\n1,2\n");
  EXPECT_EQ(kind_of([&] { read_ledger_csv(no_r); }), "BadTable");
  std::istringstream junk("R,logTan_rho\n1,abc\n");
  EXPECT_EQ(kind_of([&] { read_ledger_csv(junk); }), "BadTable");
}
