#include "l2inv/error.hpp"
#include "l2inv/heatzeta.hpp"
#include "l2inv/zd.hpp"

#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace l2inv;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double euler_gamma = 0.57721566490153286061;

HeatTrace exponential(double mu) {
  HeatTrace th = HeatTrace::callable([mu](double t) { return std::exp(-mu * t); });
  return th;
}

HeatTraceModel single_degree(int n, HeatTrace th, std::vector<double> kappas) {
  th.kappas = std::move(kappas);
  HeatTraceModel m;
  m.n = n;
  for (int p = 0; p <= n; ++p) {
    HeatTrace zero = HeatTrace::callable([](double) { return 0.0; });
    zero.kappas = std::vector<double>(static_cast<std::size_t>(n + 1), 0.0);
    m.degrees.push_back(zero);
  }
  m.degrees[static_cast<std::size_t>(n)] = th;
  return m;
}

std::vector<double> unit_kappa(int n) {
  std::vector<double> k(static_cast<std::size_t>(n + 1), 0.0);
  k.back() = 1.0;
  return k;
}

HeatTraceModel circle_model(double length) {
  const HeatTrace th = free_space_trace(1, length, 0);
  return HeatTraceModel{1, {th, free_space_trace(1, length, 1)}, CoeffConvention::standard, false, "circle"};
}

std::string kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  return "";
}

} // namespace

TEST(ZetaCoefficient, StandardValues) {
  EXPECT_NEAR(c_coeff(0, 3), -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c_coeff(0, 1), -2.0, 1e-15);
  EXPECT_NEAR(c_coeff(3, 3), euler_gamma, 1e-10);
}

TEST(ZetaCoefficient, MatchesNumericalMellinDerivative) {
  // c(i, n) = d/ds [ 1/(Gamma(s) (s - (n - i)/2)) ] at s = 0, and for i = n
  // the derivative of 1/Gamma(s + 1). Central differences with Richardson.
  for (int n = 1; n <= 5; ++n)
    for (int i = 0; i <= n; ++i) {
      const double a = 0.5 * (n - i);
      auto g = [&](double s) {
        if (i == n) return 1.0 / boost::math::tgamma(1.0 + s);
        return s / (boost::math::tgamma(1.0 + s) * (s - a));
      };
      auto diff = [&](double h) { return (g(h) - g(-h)) / (2.0 * h); };
      const double d = (4.0 * diff(1e-3) - diff(2e-3)) / 3.0;
      EXPECT_NEAR(c_coeff(i, n), d, 1e-8) << "i=" << i << " n=" << n;
    }
}

TEST(ZetaCoefficient, AlternateConventionAndRange) {
  EXPECT_NEAR(c_coeff(0, 3, CoeffConvention::alternate), -1.5, 1e-15);
  EXPECT_NEAR(c_coeff(2, 2, CoeffConvention::alternate), -euler_gamma, 1e-10);
  EXPECT_EQ(kind_of([] { c_coeff(4, 3); }), "IndexOutOfRange");
  EXPECT_EQ(kind_of([] { c_coeff(-1, 3); }), "IndexOutOfRange");
}

TEST(SmallTimeZeta, PureKappaTermHasNoIntegral) {
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i <= n; ++i) {
      const double kappa = 1.7;
      const double power = -0.5 * (n - i);
      std::vector<double> k(static_cast<std::size_t>(n + 1), 0.0);
      k[static_cast<std::size_t>(i)] = kappa;
      const HeatTraceModel m = single_degree(
          n, HeatTrace::callable([=](double t) { return kappa * std::pow(t, power); }), k);
      EXPECT_NEAR(small_time_zeta_derivative(m, n).value, c_coeff(i, n) * kappa, 1e-12);
    }
}

TEST(SmallTimeZeta, ExponentialGivesMinusE1) {
  const double e1 = boost::math::expint(1, 1.0);
  EXPECT_NEAR(e1, 0.2193839343955203, 1e-15);
  for (int n : {1, 2, 3}) {
    const HeatTraceModel m = single_degree(n, exponential(1.0), unit_kappa(n));
    EXPECT_NEAR(small_time_zeta_derivative(m, n).value, -e1, 1e-9);
  }
}

TEST(SmallTimeZeta, CircleIsMinusTwoKappa) {
  const double length = 2.5;
  const HeatTraceModel m = circle_model(length);
  EXPECT_NEAR(small_time_zeta_derivative(m, 1).value, -2.0 * length / std::sqrt(4.0 * pi), 1e-10);
}

TEST(SmallTimeZeta, MissingKappasThrows) {
  HeatTraceModel m = single_degree(1, exponential(1.0), unit_kappa(1));
  m.degrees[1].kappas.reset();
  EXPECT_EQ(kind_of([&] { small_time_zeta_derivative(m, 1); }), "MissingKappas");
}

TEST(SmallTimeZeta, WrongExpansionThrows) {
  // e^{-t} + t^{-1/2} with only the constant term declared.
  const HeatTraceModel m = single_degree(
      1, HeatTrace::callable([](double t) { return std::exp(-t) + 1.0 / std::sqrt(t); }), unit_kappa(1));
  EXPECT_EQ(kind_of([&] { small_time_zeta_derivative(m, 1); }), "AsymptoticsMismatch");
}

TEST(SmallTimeZeta, DegreeOutOfRange) {
  const HeatTraceModel m = circle_model(1.0);
  EXPECT_EQ(kind_of([&] { small_time_zeta_derivative(m, 2); }), "DegreeOutOfRange");
}

TEST(LargeTimeIntegral, ExponentialGivesE1) {
  const HeatTraceModel m = single_degree(1, exponential(1.0), unit_kappa(1));
  EXPECT_NEAR(large_time_integral(m, 1).value, boost::math::expint(1, 1.0), 1e-9);
}

TEST(LargeTimeIntegral, PowerLawTail) {
  const double kappa = 3.0;
  const HeatTraceModel m = single_degree(
      1, HeatTrace::callable([=](double t) { return kappa * std::pow(t, -1.5); }), {0.0, 0.0});
  EXPECT_NEAR(large_time_integral(m, 1).value, 2.0 / 3.0 * kappa, 1e-6);
}

TEST(LargeTimeIntegral, ConstantTraceDiverges) {
  const HeatTraceModel m = single_degree(1, HeatTrace::callable([](double) { return 1.0; }), unit_kappa(1));
  EXPECT_EQ(kind_of([&] { large_time_integral(m, 1); }), "DivergentTail");
}

TEST(LargeTimeIntegral, TableWithFittedTail) {
  // e^{-t/2} sampled up to t = 20; the remainder comes from the fitted tail.
  std::vector<double> ts, vs;
  for (int i = 0; i <= 200; ++i) {
    const double t = 1e-3 * std::pow(2e4, i / 200.0);
    ts.push_back(t);
    vs.push_back(std::exp(-0.5 * t));
  }
  HeatTrace th = HeatTrace::table(ts, vs);
  const HeatTraceModel m = single_degree(1, th, unit_kappa(1));
  EXPECT_NEAR(large_time_integral(m, 1).value, boost::math::expint(1, 0.5), 1e-6);
}

TEST(LogTorsion, ExponentialIdentityMinusLogMu) {
  for (double mu : {0.5, 1.0, 2.0, 10.0}) {
    const HeatTraceModel m = single_degree(1, exponential(mu), unit_kappa(1));
    const double v = small_time_zeta_derivative(m, 1).value + large_time_integral(m, 1).value;
    EXPECT_NEAR(v, -std::log(mu), 1e-8) << "mu=" << mu;
  }
}

TEST(LogTorsion, CircleCancels) {
  for (double length : {0.5, 1.0, pi}) {
    const TorsionBreakdown b = log_torsion(circle_model(length));
    const double k = length / std::sqrt(4.0 * pi);
    EXPECT_NEAR(b.zeta_derivatives[1], -2.0 * k, 1e-10);
    EXPECT_NEAR(b.tails[1], 2.0 * k, 1e-8);
    EXPECT_NEAR(b.total, 0.0, 1e-8) << "L=" << length;
  }
}

TEST(LogTorsion, SingleExponentialDegree) {
  const TorsionBreakdown b = log_torsion(single_degree(1, exponential(4.0), unit_kappa(1)));
  EXPECT_NEAR(b.total, -std::log(2.0), 1e-8);
}

TEST(LogTorsion, ZeroTraceIsZero) {
  const HeatTraceModel m = single_degree(2, HeatTrace::callable([](double) { return 0.0; }),
                                         std::vector<double>(3, 0.0));
  const TorsionBreakdown b = log_torsion(m);
  EXPECT_EQ(b.total, 0.0);
}

TEST(LogTorsion, LinearInTrace) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double a = u(rng), mu1 = 0.5 + 3 * u(rng), mu2 = 0.5 + 3 * u(rng);
    const HeatTraceModel m1 = single_degree(1, exponential(mu1), unit_kappa(1));
    const HeatTraceModel m2 = single_degree(1, exponential(mu2), unit_kappa(1));
    HeatTrace mix = HeatTrace::callable(
        [=](double t) { return a * std::exp(-mu1 * t) + (1 - a) * std::exp(-mu2 * t); });
    const HeatTraceModel mm = single_degree(1, mix, unit_kappa(1));
    const double lhs = small_time_zeta_derivative(mm, 1).value + large_time_integral(mm, 1).value;
    const double rhs = a * (small_time_zeta_derivative(m1, 1).value + large_time_integral(m1, 1).value) +
                       (1 - a) * (small_time_zeta_derivative(m2, 1).value + large_time_integral(m2, 1).value);
    EXPECT_NEAR(lhs, rhs, 1e-8);
  }
}

TEST(KappaFit, RecoversExactModel) {
  std::vector<double> ts, vs;
  for (int i = 0; i < 30; ++i) {
    const double t = 1e-4 * std::pow(1e4, i / 29.0);
    ts.push_back(t);
    vs.push_back(2.0 / std::sqrt(t) + 3.0);
  }
  const KappaFit f = fit_kappa(ts, vs, 1);
  EXPECT_NEAR(f.kappas[0], 2.0, 1e-8);
  EXPECT_NEAR(f.kappas[1], 3.0, 1e-8);
}

TEST(KappaFit, NoisyTableWithinTolerance) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> noise(-1e-6, 1e-6);
  std::vector<double> ts, vs;
  for (int i = 0; i < 40; ++i) {
    const double t = 1e-4 * std::pow(1e4, i / 39.0);
    ts.push_back(t);
    vs.push_back((2.0 / std::sqrt(t) + 3.0) * (1.0 + noise(rng)));
  }
  const KappaFit f = fit_kappa(ts, vs, 1);
  EXPECT_NEAR(f.kappas[0], 2.0, 1e-4);
  EXPECT_NEAR(f.kappas[1], 3.0, 1e-4);
}

TEST(KappaFit, FreeSpaceLeadingTerm) {
  for (int p = 0; p <= 3; ++p) {
    std::vector<double> ts, vs;
    const HeatTrace th = free_space_trace(3, 2.0, p);
    for (int i = 0; i < 40; ++i) {
      const double t = 1e-4 * std::pow(1e3, i / 39.0);
      ts.push_back(t);
      vs.push_back(th(t));
    }
    const KappaFit f = fit_kappa(ts, vs, 3, 0.1);
    const double k0 = boost::math::binomial_coefficient<double>(3, static_cast<unsigned>(p)) * 2.0 *
                      std::pow(4.0 * pi, -1.5);
    EXPECT_NEAR(f.kappas[0], k0, 1e-9 * k0);
    for (int i = 1; i <= 3; ++i) EXPECT_NEAR(f.kappas[static_cast<std::size_t>(i)], 0.0, 1e-8);
  }
}

TEST(KappaFit, TooFewSamplesThrows) {
  const std::vector<double> ts{0.1, 0.2}, vs{1.0, 2.0};
  EXPECT_EQ(kind_of([&] { fit_kappa(ts, vs, 1); }), "IllConditionedFit");
}

TEST(FreeSpace, TraceAndKappas) {
  const HeatTrace th = free_space_trace(1, 2.0, 1);
  EXPECT_NEAR(th(0.3), 2.0 / std::sqrt(4.0 * pi * 0.3), 1e-14);
  const HeatTrace t3 = free_space_trace(3, 1.5, 1);
  ASSERT_TRUE(t3.kappas.has_value());
  EXPECT_NEAR((*t3.kappas)[0], 3.0 * 1.5 * std::pow(4.0 * pi, -1.5), 1e-15);
  EXPECT_EQ(kind_of([] { free_space_trace(0, 1.0, 0); }), "InvalidArgument");
  EXPECT_EQ(kind_of([] { free_space_trace(1, -1.0, 0); }), "InvalidArgument");
}

TEST(FreeSpace, PoissonSummationOnCircleQuotient) {
  // sum_k exp(-t (2 pi k / L)^2) = L (4 pi t)^{-1/2} sum_m exp(-m^2 L^2 / 4t):
  // the free-space trace is the m = 0 term and the rest is exponentially small.
  const double length = 1.3;
  for (double t : {1e-3, 1e-2, 3e-2, 0.2}) {
    double sum = 0.0;
    for (int k = -2000; k <= 2000; ++k) sum += std::exp(-t * std::pow(2.0 * pi * k / length, 2));
    const double lead = free_space_trace(1, length, 0)(t);
    double images = 0.0;
    for (int m = 1; m <= 20; ++m) images += 2.0 * std::exp(-m * m * length * length / (4.0 * t));
    EXPECT_NEAR(sum, lead * (1.0 + images), 1e-12 * sum) << "t=" << t;
    EXPECT_LE(std::abs(sum - lead), 3.0 * lead * std::exp(-length * length / (4.0 * t)) + 1e-14 * lead);
  }
}

TEST(HyperbolicHeatKernel, SolvesRadialHeatEquation) {
  // d/dt k = k'' + 2 coth(r) k' on radial functions of hyperbolic 3-space.
  for (double r : {0.3, 1.0, 2.5})
    for (double t : {0.2, 0.7, 2.0}) {
      const double h = 2e-4;
      const double kt = (hyperbolic3_heat_kernel(r, t + h) - hyperbolic3_heat_kernel(r, t - h)) / (2 * h);
      const double k0 = hyperbolic3_heat_kernel(r, t);
      const double kp = hyperbolic3_heat_kernel(r + h, t), km = hyperbolic3_heat_kernel(r - h, t);
      const double krr = (kp - 2 * k0 + km) / (h * h);
      const double kr = (kp - km) / (2 * h);
      const double residual = kt - (krr + 2.0 / std::tanh(r) * kr);
      EXPECT_NEAR(residual, 0.0, 1e-5 * (std::abs(kt) + std::abs(krr))) << "r=" << r << " t=" << t;
    }
}

TEST(HyperbolicHeatKernel, ConservesMass) {
  boost::math::quadrature::tanh_sinh<double> q;
  for (double t : {0.1, 1.0, 3.0}) {
    const double mass = q.integrate(
        [t](double r) { return hyperbolic3_heat_kernel(r, t) * 4.0 * pi * std::pow(std::sinh(r), 2); }, 0.0,
        60.0);
    EXPECT_NEAR(mass, 1.0, 1e-8) << "t=" << t;
  }
}

TEST(HyperbolicHeatKernel, DiagonalMatchesLimit) {
  for (double t : {0.05, 0.5, 5.0}) {
    EXPECT_NEAR(hyperbolic3_trace_density(t), std::exp(-t) * std::pow(4 * pi * t, -1.5), 1e-15);
    EXPECT_NEAR(hyperbolic3_heat_kernel(1e-7, t), hyperbolic3_trace_density(t),
                1e-9 * hyperbolic3_trace_density(t));
  }
}

namespace {

std::pair<std::vector<double>, std::vector<double>> h0_table() {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 120; ++i) {
    const double t = 1e-4 * std::pow(1e6, i / 120.0);
    ts.push_back(t);
    vs.push_back(hyperbolic3_trace_density(t));
  }
  return {ts, vs};
}

} // namespace

TEST(PlancherelModel, FittedLeadingTermOfH0) {
  const auto tab = h0_table();
  const HeatTraceModel m = with_fitted_kappas(plancherel_model({tab, tab, tab, tab}, 3, 1.0), 0.1);
  ASSERT_TRUE(m.degrees[0].kappas.has_value());
  const std::vector<double> &k = *m.degrees[0].kappas;
  // e^{-t} (4 pi t)^{-3/2} = (4 pi)^{-3/2} (t^{-3/2} - t^{-1/2} + ...)
  EXPECT_NEAR(k[0], std::pow(4 * pi, -1.5), 1e-6);
  EXPECT_NEAR(k[2], -std::pow(4 * pi, -1.5), 1e-4);
}

TEST(PlancherelModel, VolumeScalesTorsionLinearly) {
  const auto tab = h0_table();
  const HeatTraceModel m1 = with_fitted_kappas(plancherel_model({tab, tab, tab, tab}, 3, 1.0), 0.1);
  const HeatTraceModel m2 = with_fitted_kappas(plancherel_model({tab, tab, tab, tab}, 3, 2.0), 0.1);
  const TorsionBreakdown a = log_torsion(m1), b = log_torsion(m2);
  EXPECT_NEAR(b.total, 2.0 * a.total, 1e-9 * (1.0 + std::abs(a.total)));
  for (int p = 0; p <= 3; ++p)
    EXPECT_NEAR(b.zeta_derivatives[p], 2.0 * a.zeta_derivatives[p], 1e-9 * (1.0 + std::abs(a.zeta_derivatives[p])));
}

TEST(PlancherelModel, ConstantTableFailsAsymptotics) {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 40; ++i) {
    ts.push_back(1e-3 * std::pow(1e4, i / 40.0));
    vs.push_back(1.0);
  }
  HeatTraceModel m = plancherel_model({{ts, vs}, {ts, vs}, {ts, vs}, {ts, vs}}, 3, 1.0);
  for (HeatTrace &th : m.degrees) th.kappas = std::vector<double>{1.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(kind_of([&] { small_time_zeta_derivative(m, 0); }), "AsymptoticsMismatch");
}

TEST(PlancherelModel, RejectsEvenDimensionAndBadTables) {
  const auto tab = h0_table();
  EXPECT_EQ(kind_of([&] { plancherel_model({tab, tab, tab}, 2, 1.0); }), "BadTable");
  EXPECT_EQ(kind_of([] { HeatTrace::table({0.1, 0.05, 1.0, 2.0}, {1, 1, 1, 1}); }), "BadTable");
}

TEST(ZdHeatTraceBridge, CircleLaplacianTraceFeedsPipeline) {
  // theta(t) = e^{-2t} I_0(2t) from the Z-complex decays like t^{-1/2}, so
  // its large-time integral converges.
  LaurentMatrix a(1, 1, 1);
  a.add({0}, CMatrix::Constant(1, 1, Complex(2.0)));
  a.add({1}, CMatrix::Constant(1, 1, Complex(-1.0)));
  a.add({-1}, CMatrix::Constant(1, 1, Complex(-1.0)));
  const QuadraturePolicy policy;
  HeatTrace th = HeatTrace::callable([&](double t) { return heat_trace_zd(a, t, policy); });
  const HeatTraceModel m = single_degree(1, th, unit_kappa(1));
  const double tail = large_time_integral(m, 1).value;
  boost::math::quadrature::tanh_sinh<double> q;
  // int_1^inf e^{-2t} I_0(2t) dt/t = int_0^pi/2 ... via the symbol: mean over
  // theta of E1(4 sin^2(theta/2)).
  const double expect =
      q.integrate(
          [](double th) {
            const double mu = 4 * std::pow(std::sin(th / 2), 2);
            return mu > 0.0 ? boost::math::expint(1, mu) : 0.0;
          },
          0.0, pi) /
      pi;
  EXPECT_NEAR(tail, expect, 1e-5);
}
