#include "l2inv/quadrature.hpp"

#include "l2inv/error.hpp"
#include "l2inv/linalg.hpp"
#include "l2inv/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace l2inv {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

} // namespace

std::string to_string(SingularMode mode) {
  switch (mode) {
  case SingularMode::plain: return "plain";
  case SingularMode::refine: return "refine";
  case SingularMode::exclusion: return "exclusion";
  }
  return "refine";
}

SingularMode parse_singular_mode(const std::string &name) {
  if (name == "plain") return SingularMode::plain;
  if (name == "refine") return SingularMode::refine;
  if (name == "exclusion") return SingularMode::exclusion;
  fail("InvalidPolicy", "unknown singular mode '" + name + "'");
}

int QuadraturePolicy::grid_n(int d) const {
  if (base_n > 0) return base_n;
  switch (d) {
  case 0:
  case 1: return 256;
  case 2: return 128;
  case 3: return 48;
  default: return 24;
  }
}

void QuadraturePolicy::validate() const {
  if (base_n != 0 && base_n < 8) fail("InvalidPolicy", "base grid size must be >= 8");
  if (levels < 2) fail("InvalidPolicy", "need at least 2 refinement levels");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(density_rel_tol > 0.0) || !(density_abs_tol > 0.0) ||
      !(ns_rel_tol > 0.0))
    fail("InvalidPolicy", "tolerances must be positive");
  if (max_depth < 1) fail("InvalidPolicy", "max_depth must be >= 1");
  if (max_evaluations < 1) fail("InvalidPolicy", "evaluation budget must be positive");
}

double grid_mean(int d, int n, const TorusFunction &f) {
  const std::int64_t total = ipow(n, d);
  std::vector<double> values(static_cast<std::size_t>(total));
  const double h = kTwoPi / n;
  parallel_for(values.size(), [&](std::size_t idx) {
    std::vector<double> theta(static_cast<std::size_t>(d));
    std::int64_t rest = static_cast<std::int64_t>(idx);
    for (int j = d - 1; j >= 0; --j) {
      theta[static_cast<std::size_t>(j)] = (static_cast<double>(rest % n) + 0.5) * h;
      rest /= n;
    }
    values[idx] = f(theta);
  });
  return stable_sum(values) / static_cast<double>(total);
}

IntegralEstimate grid_mean_converged(int d, const QuadraturePolicy &policy, const TorusFunction &f) {
  policy.validate();
  IntegralEstimate est;
  if (d == 0) {
    est.value = f(std::span<const double>());
    est.evaluations = 1;
    return est;
  }
  int n = policy.grid_n(d);
  double previous = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (int level = 0; level < policy.levels; ++level, n *= 2) {
    const std::int64_t cost = ipow(n, d);
    if (est.evaluations + cost > policy.max_evaluations) break;
    const double value = grid_mean(d, n, f);
    est.evaluations += cost;
    if (level > 0) {
      gap = std::abs(value - previous);
      est.value = value;
      est.error = gap;
      est.grid = n;
      if (gap <= std::max(policy.abs_tol, policy.rel_tol * std::abs(value))) return est;
    }
    previous = value;
    est.value = value;
    est.grid = n;
  }
  throw QuadratureNotConverged("grid refinement did not reach tolerance", est.value, gap);
}

IntegralEstimate periodic_split_mean(const std::function<double(double)> &f,
                                     const std::function<double(double)> &g, int scan_n,
                                     double rel_tol) {
  const double h = kTwoPi / scan_n;
  std::vector<double> scan(static_cast<std::size_t>(scan_n));
  for (int i = 0; i < scan_n; ++i) scan[static_cast<std::size_t>(i)] = g((i + 0.5) * h);

  IntegralEstimate est;
  est.evaluations = scan_n;
  std::vector<double> breaks;
  for (int i = 0; i < scan_n; ++i) {
    const double left = scan[static_cast<std::size_t>((i + scan_n - 1) % scan_n)];
    const double mid = scan[static_cast<std::size_t>(i)];
    const double right = scan[static_cast<std::size_t>((i + 1) % scan_n)];
    if (!(mid <= left && mid < right)) continue;
    std::uintmax_t iters = 200;
    const double lo = (i - 0.5) * h;
    const double hi = (i + 1.5) * h;
    const auto [x, gx] = boost::math::tools::brent_find_minima(g, lo, hi, 52, iters);
    est.evaluations += static_cast<std::int64_t>(iters);
    double t = std::fmod(x, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    breaks.push_back(t);
  }
  if (breaks.empty()) breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               breaks.end());

  boost::math::quadrature::tanh_sinh<double> ts;
  std::vector<double> parts;
  double err_total = 0.0;
  auto counted = [&](double x) {
    ++est.evaluations;
    return f(x);
  };
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = k + 1 < breaks.size() ? breaks[k + 1] : breaks.front() + kTwoPi;
    if (!(b > a)) continue;
    // Integrate on [-1, 1] and map by hand; xc is the signed distance to the
    // nearer endpoint, which keeps full precision next to the singularity.
    const double half = 0.5 * (b - a);
    auto mapped = [&](double x, double xc) { return counted(x < 0.0 ? a - half * xc : b - half * xc); };
    double err = 0.0;
    double l1 = 0.0;
    parts.push_back(half * ts.integrate(mapped, -1.0, 1.0, rel_tol, &err, &l1));
    err_total += half * err;
  }
  est.value = stable_sum(parts) / kTwoPi;
  est.error = err_total / kTwoPi;
  return est;
}

IntegralEstimate periodic_gk_mean(const std::function<double(double)> &f, double rel_tol,
                                  unsigned max_depth) {
  IntegralEstimate est;
  auto counted = [&](double x) {
    ++est.evaluations;
    return f(x);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      counted, 0.0, kTwoPi, max_depth, rel_tol, &err);
  est.value = value / kTwoPi;
  est.error = err / kTwoPi;
  return est;
}

} // namespace l2inv
