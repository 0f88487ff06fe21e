#include "l2inv/heatzeta.hpp"

#include "l2inv/error.hpp"
#include "l2inv/linalg.hpp"

#include <cmath>
// pchip.hpp in Boost 1.74 calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace l2inv {
namespace {

constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kCallableT0 = 1e-6;   // small-time cut for callables
constexpr double kCallableTEnd = 1e3;  // large-time quadrature end for callables
constexpr double kQuadTol = 1e-12;

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double expansion(const std::vector<double> &kappas, int n, double t) {
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) acc += kappas[static_cast<std::size_t>(i)] * std::pow(t, -0.5 * (n - i));
  return acc;
}

double expansion_scale(const std::vector<double> &kappas, int n, double t) {
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) acc += std::abs(kappas[static_cast<std::size_t>(i)]) * std::pow(t, -0.5 * (n - i));
  return acc;
}

// Remainder theta - expansion with rounding noise flushed to zero.
double remainder(const HeatTrace &theta, const std::vector<double> &kappas, int n, double t) {
  const double v = theta(t);
  const double e = expansion(kappas, n, t);
  const double r = v - e;
  const double scale = std::abs(v) + expansion_scale(kappas, n, t);
  return std::abs(r) <= 64.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : r;
}

const HeatTrace &degree(const HeatTraceModel &model, int p) {
  if (p < 0 || p >= static_cast<int>(model.degrees.size()))
    fail("DegreeOutOfRange", "degree " + std::to_string(p) + " not in the model");
  return model.degrees[static_cast<std::size_t>(p)];
}

void check_asymptotics(const HeatTrace &theta, const std::vector<double> &kappas, int n) {
  std::vector<double> ts;
  if (theta.is_table())
    ts.assign(theta.times().begin(), theta.times().begin() + 3);
  else
    ts = {1e-6, 1e-5, 1e-4};
  std::vector<double> rs;
  bool negligible = true;
  for (double t : ts) {
    const double r = remainder(theta, kappas, n, t);
    const double scale = std::abs(theta(t)) + expansion_scale(kappas, n, t);
    // fitted kappas are good to about 1e-8 relative; below 1e-6 is fit noise
    if (std::abs(r) > 1e-6 * scale) negligible = false;
    rs.push_back(r);
  }
  if (negligible) return;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    mx += std::log(ts[i]);
    my += std::log(std::abs(rs[i]) + std::numeric_limits<double>::min());
  }
  mx /= 3.0;
  my /= 3.0;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = std::log(ts[i]) - mx;
    sxx += x * x;
    sxy += x * (std::log(std::abs(rs[i]) + std::numeric_limits<double>::min()) - my);
  }
  const double slope = sxy / sxx;
  if (!(slope >= 0.25))
    fail("AsymptoticsMismatch", "remainder decays like t^" + std::to_string(slope) +
                                    " at the smallest sample times; expected O(t^{1/2})");
}

struct TailFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool zero = false;
};

TailFit fit_tail(const std::vector<double> &ts, const std::vector<double> &vs) {
  TailFit fit;
  if (vs.back() == 0.0) {
    fit.zero = true;
    return fit;
  }
  for (double v : vs)
    if (!(v > 0.0)) fail("DivergentTail", "trace is not positive on the tail window");
  const Index m = static_cast<Index>(ts.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  const double tmax = ts.back();
  const double lmax = std::log(tmax);
  for (Index i = 0; i < m; ++i) {
    const double t = ts[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = -t / tmax;
    design(i, 2) = -std::log(t) / lmax;
    rhs(i) = std::log(vs[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  fit.a = std::exp(coef(0));
  fit.b = coef(1) / tmax;
  fit.c = coef(2) / lmax;
  if (std::abs(fit.b) * tmax < 1e-6) fit.b = 0.0;
  // A heat trace is nonincreasing, so a slightly negative rate is the
  // power-law correction leaking into the exponential column: refit without it.
  if (fit.b < 0.0 && -fit.b * tmax < 1e-2) {
    Eigen::MatrixXd power(m, 2);
    power.col(0) = design.col(0);
    power.col(1) = design.col(2);
    const Eigen::Vector2d pc = power.colPivHouseholderQr().solve(rhs);
    fit.a = std::exp(pc(0));
    fit.b = 0.0;
    fit.c = pc(1) / lmax;
  }
  if (std::abs(fit.c) < 1e-9) fit.c = 0.0;
  return fit;
}

double tail_integral(const TailFit &fit, double T) {
  if (fit.zero) return 0.0;
  if (fit.b < 0.0) fail("DivergentTail", "fitted tail grows exponentially");
  if (fit.b == 0.0 && fit.c <= 0.0)
    fail("DivergentTail", "fitted tail decays like t^-" + std::to_string(fit.c) + ", not integrable against dt/t");
  if (fit.b == 0.0) return fit.a * std::pow(T, -fit.c) / fit.c;
  const double front = fit.a * std::exp(-fit.b * T);
  if (front == 0.0) return 0.0;
  boost::math::quadrature::exp_sinh<double> es;
  const double b = fit.b, c = fit.c;
  auto f = [=](double x) { return std::exp(-b * x) * std::pow(T + x, -c - 1.0); };
  return front * es.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
}

ZetaEstimate gk(const std::function<double(double)> &f, double a, double b) {
  ZetaEstimate e;
  if (!(b > a)) return e;
  double err = 0.0;
  e.value = GK::integrate(f, a, b, 15, kQuadTol, &err);
  e.error = err;
  return e;
}

Error relabel(const Error &e, int p) {
  return Error(e.kind(), "degree " + std::to_string(p) + ": " +
                             std::string(e.what()).substr(e.kind().size() + 2));
}

} // namespace

double c_coeff(int i, int n, CoeffConvention convention) {
  if (n < 0 || i < 0 || i > n)
    fail("IndexOutOfRange", "c(" + std::to_string(i) + ", " + std::to_string(n) + ") needs 0 <= i <= n");
  if (convention == CoeffConvention::alternate) return i == n ? -kEulerGamma : -0.5 * (n - i);
  return i == n ? kEulerGamma : 2.0 / (i - n);
}

HeatTrace HeatTrace::callable(std::function<double(double)> fn, std::string label) {
  HeatTrace h;
  h.fn_ = std::move(fn);
  h.label = std::move(label);
  return h;
}

HeatTrace HeatTrace::table(std::vector<double> ts, std::vector<double> values, std::string label) {
  if (ts.size() != values.size()) fail("BadTable", "times and values differ in length");
  if (ts.size() < 4) fail("BadTable", "need at least 4 samples");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0) || !std::isfinite(ts[i])) fail("BadTable", "times must be positive and finite");
    if (i > 0 && !(ts[i] > ts[i - 1])) fail("BadTable", "times must be strictly increasing");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) fail("BadTable", "values must be finite and >= 0");
  }
  if (!(ts.front() < 1.0) || !(ts.back() >= 1.0)) fail("BadTable", "table must start below t = 1 and reach it");
  HeatTrace h;
  h.ts_ = ts;
  h.values_ = values;
  h.label = std::move(label);
  std::vector<double> x(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) x[i] = std::log(ts[i]);
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(x),
                                                                                         std::move(values));
  h.interp_ = std::make_shared<const std::function<double(double)>>(
      [spline](double lt) { return (*spline)(lt); });
  return h;
}

double HeatTrace::operator()(double t) const {
  if (!is_table()) {
    if (!fn_) return 0.0;
    return fn_(t);
  }
  if (!(t >= ts_.front() * (1.0 - 1e-14) && t <= ts_.back() * (1.0 + 1e-14)))
    fail("OutOfDomain", "t = " + std::to_string(t) + " outside the table");
  return (*interp_)(std::clamp(std::log(t), std::log(ts_.front()), std::log(ts_.back())));
}

HeatTrace HeatTrace::scaled(double s) const {
  HeatTrace h;
  if (is_table()) {
    std::vector<double> v = values_;
    for (double &x : v) x *= s;
    h = table(ts_, std::move(v), label);
  } else {
    auto f = fn_;
    h = callable([f, s](double t) { return f ? s * f(t) : 0.0; }, label);
  }
  if (kappas) {
    std::vector<double> k = *kappas;
    for (double &x : k) x *= s;
    h.kappas = std::move(k);
  }
  return h;
}

ZetaEstimate small_time_zeta_derivative(const HeatTraceModel &model, int p) {
  const HeatTrace &theta = degree(model, p);
  const int n = model.n;
  if (!theta.kappas) fail("MissingKappas", "degree " + std::to_string(p) + " has no expansion coefficients");
  const std::vector<double> &kappas = *theta.kappas;
  if (static_cast<int>(kappas.size()) != n + 1)
    fail("MissingKappas", "need " + std::to_string(n + 1) + " coefficients, got " + std::to_string(kappas.size()));
  double kappa_scale = 0.0;
  for (double k : kappas) kappa_scale = std::max(kappa_scale, std::abs(k));
  if (model.require_positive_leading && !(kappas[0] > 1e-8 * kappa_scale))
    fail("AsymptoticsMismatch", "leading heat coefficient must be positive");
  check_asymptotics(theta, kappas, n);

  // int_0^1 r(t) dt/t in s = ln t on [ln t0, 0]; below t0, r ~ r(t0) (t/t0)^q
  const double t0 = theta.is_table() ? theta.times().front() : kCallableT0;
  const double t1 = theta.is_table() ? theta.times()[1] : 4.0 * t0;
  ZetaEstimate est = gk([&](double s) { return remainder(theta, kappas, n, std::exp(s)); }, std::log(t0), 0.0);
  const double r0 = remainder(theta, kappas, n, t0);
  if (r0 != 0.0) {
    const double r1 = remainder(theta, kappas, n, t1);
    double q = 0.5;
    if (r1 != 0.0 && (r0 > 0.0) == (r1 > 0.0)) q = std::log(r1 / r0) / std::log(t1 / t0);
    q = std::clamp(q, 0.25, 4.0);
    est.value += r0 / q;
  }
  std::vector<double> parts{est.value};
  for (int i = 0; i <= n; ++i) parts.push_back(c_coeff(i, n, model.convention) * kappas[static_cast<std::size_t>(i)]);
  est.value = stable_sum(parts);
  return est;
}

ZetaEstimate large_time_integral(const HeatTraceModel &model, int p) {
  const HeatTrace &theta = degree(model, p);
  const double T = theta.is_table() ? theta.times().back() : kCallableTEnd;
  ZetaEstimate est = gk([&](double s) { return theta(std::exp(s)); }, 0.0, std::log(T));
  std::vector<double> ts, vs;
  if (theta.is_table()) {
    const auto &tt = theta.times();
    const auto &vv = theta.values();
    for (std::size_t i = 0; i < tt.size(); ++i)
      if (tt[i] >= T / 10.0) {
        ts.push_back(tt[i]);
        vs.push_back(vv[i]);
      }
    if (ts.size() < 3) {
      ts.assign(tt.end() - 3, tt.end());
      vs.assign(vv.end() - 3, vv.end());
    }
  } else {
    for (int i = 0; i <= 16; ++i) {
      const double t = T / 10.0 * std::pow(10.0, i / 16.0);
      ts.push_back(t);
      vs.push_back(theta(t));
    }
  }
  est.value += tail_integral(fit_tail(ts, vs), T);
  return est;
}

TorsionBreakdown log_torsion(const HeatTraceModel &model) {
  if (static_cast<int>(model.degrees.size()) != model.n + 1)
    fail("ShapeMismatch", "model needs " + std::to_string(model.n + 1) + " degrees");
  TorsionBreakdown out;
  std::vector<double> terms;
  for (int p = 0; p <= model.n; ++p) {
    ZetaEstimate z, tail;
    try {
      z = small_time_zeta_derivative(model, p);
      tail = large_time_integral(model, p);
    } catch (const QuadratureNotConverged &e) {
      throw QuadratureNotConverged("degree " + std::to_string(p) + ": " + e.what(), e.estimate(), e.gap());
    } catch (const Error &e) {
      throw relabel(e, p);
    }
    out.zeta_derivatives.push_back(z.value);
    out.tails.push_back(tail.value);
    out.errors.push_back(z.error + tail.error);
    terms.push_back(0.5 * p * (p % 2 == 1 ? 1.0 : -1.0) * (z.value + tail.value));
  }
  out.total = stable_sum(terms);
  return out;
}

KappaFit fit_kappa(const std::vector<double> &ts, const std::vector<double> &values, int n, double window) {
  if (n < 0) fail("IllConditionedFit", "dimension must be >= 0");
  if (ts.size() != values.size()) fail("IllConditionedFit", "times and values differ in length");
  std::vector<double> t, v;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i] > 0.0 && ts[i] <= window) {
      t.push_back(ts[i]);
      v.push_back(values[i]);
    }
  const std::size_t need = 2 * static_cast<std::size_t>(n + 1);
  if (t.size() < need)
    fail("IllConditionedFit", "need at least " + std::to_string(need) + " samples with t <= " + std::to_string(window) +
                                  ", got " + std::to_string(t.size()));
  const Index m = static_cast<Index>(t.size());
  const Index cols = n + 2;
  Eigen::MatrixXd design(m, cols);
  Eigen::VectorXd rhs(m);
  for (Index r = 0; r < m; ++r) {
    const double tr = t[static_cast<std::size_t>(r)];
    for (int i = 0; i <= n; ++i) design(r, i) = std::pow(tr, -0.5 * (n - i));
    design(r, n + 1) = std::sqrt(tr);
    rhs(r) = v[static_cast<std::size_t>(r)];
  }
  // Row weights put every sample on the scale of the leading column.
  for (Index r = 0; r < m; ++r) {
    const double w = 1.0 / design.row(r).cwiseAbs().maxCoeff();
    design.row(r) *= w;
    rhs(r) *= w;
  }
  Eigen::VectorXd colscale(cols);
  for (Index c = 0; c < cols; ++c) {
    colscale(c) = design.col(c).norm();
    if (colscale(c) > 0.0) design.col(c) /= colscale(c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  KappaFit fit;
  fit.condition = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(fit.condition <= 1e12))
    fail("IllConditionedFit", "condition number " + std::to_string(fit.condition));
  Eigen::VectorXd coef = svd.solve(rhs);
  for (Index c = 0; c < cols; ++c) coef(c) /= colscale(c) > 0.0 ? colscale(c) : 1.0;
  for (int i = 0; i <= n; ++i) fit.kappas.push_back(coef(i));
  fit.remainder = coef(n + 1);
  double res2 = 0.0, v2 = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    double model = fit.remainder * std::sqrt(t[r]);
    for (int i = 0; i <= n; ++i) model += fit.kappas[static_cast<std::size_t>(i)] * std::pow(t[r], -0.5 * (n - i));
    res2 += (model - v[r]) * (model - v[r]);
    v2 += v[r] * v[r];
  }
  fit.residual = v2 > 0.0 ? std::sqrt(res2 / v2) : std::sqrt(res2);
  return fit;
}

HeatTraceModel with_fitted_kappas(HeatTraceModel model, double window) {
  for (HeatTrace &h : model.degrees) {
    std::vector<double> ts, vs;
    if (h.is_table()) {
      ts = h.times();
      vs = h.values();
    } else {
      for (int i = 0; i < 40; ++i) {
        const double t = 1e-4 * std::pow(window / 1e-4, i / 39.0);
        ts.push_back(t);
        vs.push_back(h(t));
      }
    }
    h.kappas = fit_kappa(ts, vs, model.n, window).kappas;
  }
  return model;
}

HeatTrace free_space_trace(int n, double vol, int p) {
  if (n < 1) fail("InvalidArgument", "dimension must be >= 1");
  if (!(vol > 0.0) || !std::isfinite(vol)) fail("InvalidArgument", "volume must be positive");
  if (p < 0 || p > n) fail("DegreeOutOfRange", "degree " + std::to_string(p));
  const double coef = boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(p)) *
                      vol * std::pow(4.0 * std::numbers::pi, -0.5 * n);
  HeatTrace h = HeatTrace::callable([coef, n](double t) { return coef * std::pow(t, -0.5 * n); },
                                    "flat R^" + std::to_string(n) + " degree " + std::to_string(p));
  std::vector<double> k(static_cast<std::size_t>(n + 1), 0.0);
  k[0] = coef;
  h.kappas = std::move(k);
  return h;
}

HeatTraceModel free_space_model(int n, double vol) {
  HeatTraceModel m;
  m.n = n;
  for (int p = 0; p <= n; ++p) m.degrees.push_back(free_space_trace(n, vol, p));
  m.label = "flat";
  return m;
}

HeatTraceModel plancherel_model(const std::vector<std::pair<std::vector<double>, std::vector<double>>> &tables,
                                int n, double vol) {
  if (n < 1 || n % 2 == 0) fail("BadTable", "homogeneous-trace models need odd dimension, got " + std::to_string(n));
  if (!(vol > 0.0) || !std::isfinite(vol)) fail("BadTable", "volume must be positive");
  if (static_cast<int>(tables.size()) != n + 1)
    fail("BadTable", "need " + std::to_string(n + 1) + " degree tables, got " + std::to_string(tables.size()));
  HeatTraceModel m;
  m.n = n;
  m.require_positive_leading = true;
  m.label = "plancherel";
  for (std::size_t p = 0; p < tables.size(); ++p) {
    for (double v : tables[p].second)
      if (!(v > 0.0)) fail("BadTable", "degree " + std::to_string(p) + " table must be positive");
    std::vector<double> vs = tables[p].second;
    for (double &v : vs) v *= vol;
    m.degrees.push_back(HeatTrace::table(tables[p].first, std::move(vs), "degree " + std::to_string(p)));
  }
  return m;
}

double hyperbolic3_heat_kernel(double r, double t) {
  const double shape = r == 0.0 ? 1.0 : r / std::sinh(r);
  return std::pow(4.0 * std::numbers::pi * t, -1.5) * shape * std::exp(-t - r * r / (4.0 * t));
}

double hyperbolic3_trace_density(double t) { return hyperbolic3_heat_kernel(0.0, t); }

} // namespace l2inv
