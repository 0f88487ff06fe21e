#include "l2inv/zd.hpp"

#include "l2inv/error.hpp"
#include "l2inv/parallel.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace l2inv {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

RVector sv_at(const LaurentMatrix &a, std::span<const double> theta) {
  return singular_values(symbol_at_angles(a, theta));
}

// Counts sigma <= lambda; lambda below the zero threshold counts the kernel.
Index count_sv(const double *s, Index k, double lambda) {
  const double thr = zero_threshold(k > 0 ? s[0] : 0.0);
  const double cut = std::max(lambda, thr);
  Index c = 0;
  for (Index i = 0; i < k; ++i)
    if (s[i] <= cut) ++c;
  return c;
}

double density_tol(const QuadraturePolicy &p, double fhat) {
  return std::max(p.density_abs_tol, p.density_rel_tol * std::max(fhat, 0.0));
}

class Neumaier {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<double> cell_centers(int d, int n) {
  const std::int64_t total = ipow(n, d);
  std::vector<double> centers(static_cast<std::size_t>(total * d));
  const double h = kTwoPi / n;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rest = idx;
    for (int j = d - 1; j >= 0; --j) {
      centers[static_cast<std::size_t>(idx * d + j)] = (static_cast<double>(rest % n) + 0.5) * h;
      rest /= n;
    }
  }
  return centers;
}

void evaluate_cells(const LaurentMatrix &a, int d, Index k, const std::vector<double> &centers,
                    std::size_t first, std::vector<double> &sv) {
  const std::size_t count = centers.size() / static_cast<std::size_t>(std::max(d, 1));
  const std::size_t ncells = d == 0 ? 1 : count;
  sv.resize(ncells * static_cast<std::size_t>(k));
  if (first >= ncells) return;
  parallel_for(ncells - first, [&](std::size_t off) {
    const std::size_t c = first + off;
    const RVector s = sv_at(a, std::span<const double>(centers.data() + c * d, static_cast<std::size_t>(d)));
    std::copy(s.data(), s.data() + k, sv.begin() + static_cast<std::ptrdiff_t>(c * k));
  });
}

DensityReport density_plain(const LaurentMatrix &a, std::span<const double> lambdas,
                            const QuadraturePolicy &policy) {
  const int d = a.d;
  const Index k = a.cols;
  const std::size_t nl = lambdas.size();
  int n = policy.grid_n(d);
  std::int64_t evaluations = 0;
  std::vector<double> prev;
  double prev_betti = 0.0;
  std::vector<double> gaps(nl, std::numeric_limits<double>::infinity());
  for (int level = 0; level < policy.levels; ++level, n *= 2) {
    const std::int64_t total = d == 0 ? 1 : ipow(n, d);
    if (evaluations + total > policy.max_evaluations) break;
    evaluations += total;
    const std::vector<double> centers = d == 0 ? std::vector<double>{} : cell_centers(d, n);
    std::vector<double> sv;
    evaluate_cells(a, d, k, centers, 0, sv);
    std::vector<Index> counts(nl + 1, 0);
    for (std::int64_t c = 0; c < total; ++c) {
      const double *s = sv.data() + c * k;
      for (std::size_t j = 0; j < nl; ++j) counts[j] += count_sv(s, k, lambdas[j]);
      counts[nl] += count_sv(s, k, 0.0);
    }
    std::vector<double> values(nl);
    for (std::size_t j = 0; j < nl; ++j)
      values[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
    const double betti = static_cast<double>(counts[nl]) / static_cast<double>(total);
    if (d == 0 || level > 0) {
      bool ok = true;
      for (std::size_t j = 0; j < nl; ++j) {
        gaps[j] = d == 0 ? 0.0 : std::abs(values[j] - prev[j]);
        if (gaps[j] > density_tol(policy, values[j] - betti)) ok = false;
      }
      if (d != 0 && std::abs(betti - prev_betti) > policy.density_abs_tol) ok = false;
      if (ok) {
        DensityReport r;
        r.lambdas.assign(lambdas.begin(), lambdas.end());
        r.values = values;
        r.betti = betti;
        r.errors = gaps;
        return r;
      }
    }
    prev = values;
    prev_betti = betti;
  }
  double worst = 0.0;
  double estimate = 0.0;
  for (std::size_t j = 0; j < nl; ++j)
    if (gaps[j] > worst || !std::isfinite(gaps[j])) {
      worst = gaps[j];
      estimate = prev.empty() ? 0.0 : prev[j];
    }
  throw QuadratureNotConverged("density grid refinement did not reach tolerance", estimate, worst);
}

// Adaptive cells: a cell whose singular values may cross an unresolved
// lambda (Weyl: |sigma_i(z) - sigma_i(z')| <= L |z - z'|) is split in 2^d.
DensityReport density_refine(const LaurentMatrix &a, std::span<const double> lambdas,
                             const QuadraturePolicy &policy) {
  const int d = a.d;
  const Index k = a.cols;
  const std::size_t nl = lambdas.size();
  const double lip = lipschitz_bound(a);
  const int n0 = d == 0 ? 1 : policy.grid_n(d);
  const double h0 = kTwoPi / n0;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const std::int64_t ncell0 = d == 0 ? 1 : ipow(n0, d);
  const double vol0 = 1.0 / static_cast<double>(ncell0);

  std::vector<double> centers = d == 0 ? std::vector<double>{} : cell_centers(d, n0);
  std::vector<int> depth(static_cast<std::size_t>(ncell0), 0);
  std::vector<double> sv;
  evaluate_cells(a, d, k, centers, 0, sv);
  std::int64_t evaluations = ncell0;

  std::vector<double> values(nl, 0.0), prev(nl, 0.0), errors(nl, 0.0);
  std::vector<char> done(nl, 0);
  std::vector<int> stable(nl, 0);
  for (std::size_t j = 0; j < nl; ++j)
    if (!(lambdas[j] > 0.0)) done[j] = 1;
  double betti = 0.0, prev_betti = 0.0;
  bool have_prev = false;

  // per cell, each singular value touches a contiguous range of the sorted
  // lambdas; ranges are accumulated as difference arrays
  std::vector<std::size_t> order(nl);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return lambdas[x] < lambdas[y]; });
  std::vector<double> sorted(nl);
  for (std::size_t r = 0; r < nl; ++r) sorted[r] = lambdas[order[r]];
  auto first_at_least = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  };
  auto first_above = [&](double v) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  };

  std::vector<double> esum(nl), cell_max(nl);
  for (int sweep = 0;; ++sweep) {
    const std::size_t ncells = depth.size();
    std::vector<Neumaier> fdiff(nl + 1), ediff(nl + 1);
    std::vector<std::vector<std::int64_t>> sdiff;
    Neumaier bsum;
    for (std::size_t c = 0; c < ncells; ++c) {
      const double *s = sv.data() + c * static_cast<std::size_t>(k);
      const double vol = std::ldexp(vol0, -d * depth[c]);
      const double lr = lip * 0.5 * std::ldexp(h0, -depth[c]) * sqrt_d;
      const double thr = zero_threshold(k > 0 ? s[0] : 0.0);
      bsum.add(vol * static_cast<double>(count_sv(s, k, 0.0)));
      for (Index i = 0; i < k; ++i) {
        if (s[i] <= thr) {
          fdiff[0].add(vol);
          continue;
        }
        fdiff[first_at_least(s[i])].add(vol);
        if (!(lr > 0.0)) continue;
        const std::size_t lo = first_at_least(s[i] - lr), hi = first_above(s[i] + lr);
        if (lo >= hi) continue;
        ediff[lo].add(vol);
        ediff[hi].add(-vol);
        const auto dc = static_cast<std::size_t>(depth[c]);
        if (sdiff.size() <= dc) sdiff.resize(dc + 1);
        if (sdiff[dc].empty()) sdiff[dc].assign(nl + 1, 0);
        ++sdiff[dc][lo];
        --sdiff[dc][hi];
      }
    }
    betti = bsum.value();
    Neumaier frun, erun;
    std::vector<std::int64_t> srun(sdiff.size(), 0);
    for (std::size_t r = 0; r < nl; ++r) {
      frun.add(fdiff[r].value());
      erun.add(ediff[r].value());
      const std::size_t j = order[r];
      values[j] = frun.value();
      esum[j] = std::max(erun.value(), 0.0);
      cell_max[j] = 0.0;
      for (std::size_t dc = 0; dc < sdiff.size(); ++dc) {
        if (sdiff[dc].empty()) continue;
        srun[dc] += sdiff[dc][r];
        if (srun[dc] > 0 && cell_max[j] == 0.0) cell_max[j] = std::ldexp(vol0, -d * static_cast<int>(dc));
      }
    }

    bool all_done = true;
    for (std::size_t j = 0; j < nl; ++j) {
      if (done[j]) continue;
      const double fhat = values[j] - betti;
      const double tol = density_tol(policy, fhat);
      const double bound = esum[j];
      const double gap = have_prev ? std::abs(values[j] - prev[j]) : kInfinityPlus;
      // A single unresolved crossing can leave the sum unchanged for a
      // sweep. In one dimension the match has to hold for three sweeps with
      // every straddling cell below tolerance; above that, an exact repeat
      // only counts once the straddling volume is near the tolerance.
      stable[j] = gap <= tol ? stable[j] + 1 : 0;
      const bool fine = d == 0 || (d == 1 ? stable[j] >= 3 && cell_max[j] <= tol : gap > 0.0 || bound <= 64.0 * tol);
      if (bound <= tol) {
        done[j] = 1;
        errors[j] = bound;
      } else if (stable[j] >= 1 && fine && fhat > 0.0 && prev[j] - prev_betti > 0.0) {
        done[j] = 1;
        errors[j] = std::max(gap, cell_max[j]);
      } else {
        errors[j] = std::min(bound, gap);
        all_done = false;
      }
    }
    if (all_done) break;

    std::vector<double> active;
    for (std::size_t j = 0; j < nl; ++j)
      if (!done[j]) active.push_back(lambdas[j]);
    std::sort(active.begin(), active.end());

    std::vector<double> next_centers;
    std::vector<int> next_depth;
    std::vector<double> next_sv;
    next_centers.reserve(centers.size());
    next_depth.reserve(depth.size());
    next_sv.reserve(sv.size());
    std::vector<std::size_t> fresh;
    bool split_any = false;
    for (std::size_t c = 0; c < ncells; ++c) {
      const double *s = sv.data() + c * static_cast<std::size_t>(k);
      const double lr = lip * 0.5 * std::ldexp(h0, -depth[c]) * sqrt_d;
      const double thr = zero_threshold(k > 0 ? s[0] : 0.0);
      bool split = false;
      if (lr > 0.0 && depth[c] < policy.max_depth) {
        for (Index i = 0; i < k && !split; ++i) {
          if (s[i] <= thr) continue;
          auto it = std::lower_bound(active.begin(), active.end(), s[i] - lr);
          if (it != active.end() && *it <= s[i] + lr) split = true;
        }
      }
      if (!split) {
        next_centers.insert(next_centers.end(), centers.begin() + static_cast<std::ptrdiff_t>(c * d),
                            centers.begin() + static_cast<std::ptrdiff_t>((c + 1) * d));
        next_depth.push_back(depth[c]);
        next_sv.insert(next_sv.end(), s, s + k);
        continue;
      }
      split_any = true;
      const double quarter = 0.25 * std::ldexp(h0, -depth[c]);
      for (int child = 0; child < (1 << d); ++child) {
        fresh.push_back(next_depth.size());
        for (int j = 0; j < d; ++j) {
          const double offset = (child >> (d - 1 - j)) & 1 ? quarter : -quarter;
          next_centers.push_back(centers[c * d + static_cast<std::size_t>(j)] + offset);
        }
        next_depth.push_back(depth[c] + 1);
        next_sv.insert(next_sv.end(), static_cast<std::size_t>(k), 0.0);
      }
    }
    double worst = 0.0, estimate = 0.0;
    for (std::size_t j = 0; j < nl; ++j)
      if (!done[j] && errors[j] >= worst) {
        worst = errors[j];
        estimate = values[j];
      }
    if (!split_any)
      throw QuadratureNotConverged("density cells reached the depth limit", estimate, worst);
    if (evaluations + static_cast<std::int64_t>(fresh.size()) > policy.max_evaluations)
      throw QuadratureNotConverged("density cells exceeded the evaluation budget", estimate, worst);
    evaluations += static_cast<std::int64_t>(fresh.size());

    parallel_for(fresh.size(), [&](std::size_t f) {
      const std::size_t c = fresh[f];
      const RVector s = sv_at(a, std::span<const double>(next_centers.data() + c * d, static_cast<std::size_t>(d)));
      std::copy(s.data(), s.data() + k, next_sv.begin() + static_cast<std::ptrdiff_t>(c * k));
    });
    centers.swap(next_centers);
    depth.swap(next_depth);
    sv.swap(next_sv);
    prev = values;
    prev_betti = betti;
    have_prev = true;
  }

  DensityReport r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  r.values = values;
  r.betti = betti;
  r.errors = errors;
  return r;
}

std::vector<std::vector<double>> sample_points(int d) {
  static constexpr double kAlpha[] = {1.4142135623730951, 1.7320508075688772, 2.2360679774997898,
                                      2.6457513110645907, 3.3166247903553998, 3.6055512754639891};
  std::vector<std::vector<double>> pts;
  for (int i = 1; i <= 24; ++i) {
    std::vector<double> theta(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const double x = i * kAlpha[j % 6] + 0.1234567 * (j / 6);
      theta[static_cast<std::size_t>(j)] = kTwoPi * (x - std::floor(x));
    }
    pts.push_back(std::move(theta));
  }
  return pts;
}

int max_abs_exponent(const LaurentMatrix &a) {
  int m = 0;
  for (const auto &[g, block] : a.terms)
    for (int x : g) m = std::max(m, std::abs(x));
  return m;
}

using SvFunction = std::function<double(const RVector &)>;

IntegralEstimate integrate_symbol(const LaurentMatrix &a, const QuadraturePolicy &policy,
                                  const SvFunction &f, Index g_index, SingularMode mode) {
  const int d = a.d;
  if (d == 0) {
    IntegralEstimate e;
    e.value = f(sv_at(a, {}));
    e.evaluations = 1;
    return e;
  }
  auto value_at = [&](std::span<const double> theta) { return f(sv_at(a, theta)); };
  if (mode == SingularMode::plain) return grid_mean_converged(d, policy, value_at);

  if (mode == SingularMode::exclusion) {
    int n = policy.grid_n(d);
    for (int i = 1; i < policy.levels; ++i) {
      if (ipow(2LL * n, d) > policy.max_evaluations / 4) break;
      n *= 2;
    }
    const std::int64_t total = ipow(n, d);
    const std::vector<double> centers = cell_centers(d, n);
    std::vector<double> fv(static_cast<std::size_t>(total)), gv(static_cast<std::size_t>(total));
    parallel_for(fv.size(), [&](std::size_t c) {
      const RVector s = sv_at(a, std::span<const double>(centers.data() + c * d, static_cast<std::size_t>(d)));
      fv[c] = f(s);
      gv[c] = s(g_index);
    });
    const double res = lipschitz_bound(a) * 0.5 * (kTwoPi / n) * std::sqrt(static_cast<double>(d));
    std::vector<double> radii, integrals;
    for (int e = 1; e <= 40; ++e) {
      const double r = std::ldexp(1.0, -e);
      if (r < 4.0 * res) break;
      std::vector<double> kept;
      kept.reserve(fv.size());
      for (std::size_t c = 0; c < fv.size(); ++c)
        if (gv[c] >= r) kept.push_back(fv[c]);
      radii.push_back(r);
      integrals.push_back(stable_sum(kept) / static_cast<double>(total));
    }
    if (radii.size() < 3)
      throw QuadratureNotConverged("grid too coarse for exclusion radii", integrals.empty() ? 0.0 : integrals.back(),
                                   kInfinityPlus);
    Eigen::MatrixXd design(static_cast<Index>(radii.size()), 3);
    Eigen::VectorXd rhs(static_cast<Index>(radii.size()));
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double r = radii[i];
      design(static_cast<Index>(i), 0) = 1.0;
      design(static_cast<Index>(i), 1) = r * std::log(r);
      design(static_cast<Index>(i), 2) = r;
      rhs(static_cast<Index>(i)) = integrals[i];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    IntegralEstimate e;
    e.value = coef(0);
    e.error = std::abs(coef(0) - integrals.back());
    e.grid = n;
    e.evaluations = total;
    return e;
  }

  const int scan_n = 64 + 16 * max_abs_exponent(a);
  auto inner = [&](std::vector<double> theta) {
    auto fx = [&](double x) {
      theta.back() = x;
      return f(sv_at(a, theta));
    };
    auto gx = [&](double x) {
      theta.back() = x;
      return sv_at(a, theta)(g_index);
    };
    return periodic_split_mean(fx, gx, scan_n, policy.rel_tol);
  };
  if (d == 1) return inner({0.0});
  if (d == 2) {
    std::int64_t evals = 0;
    double inner_err = 0.0;
    auto outer = [&](double x) {
      const IntegralEstimate e = inner({x, 0.0});
      evals += e.evaluations;
      inner_err = std::max(inner_err, e.error);
      return e.value;
    };
    IntegralEstimate e = periodic_gk_mean(outer, policy.rel_tol);
    e.evaluations = evals;
    e.error += inner_err;
    return e;
  }
  QuadraturePolicy outer_policy = policy;
  outer_policy.base_n = policy.grid_n(d);
  return grid_mean_converged(d - 1, outer_policy, [&](std::span<const double> head) {
    std::vector<double> theta(head.begin(), head.end());
    theta.push_back(0.0);
    return inner(theta).value;
  });
}

// Singular values below the rounding level of the symbol evaluation carry
// no information; flooring them there keeps the log integrable in practice.
double log_det_prime(const RVector &s, Index r, double floor) {
  double acc = 0.0;
  for (Index i = 0; i < r; ++i) acc += std::log(std::max(s(i), floor));
  return acc;
}

Index checked_rank(const LaurentMatrix &a, bool allow_kernel) {
  const Index r = generic_rank(a);
  if (!allow_kernel && r < std::min(a.rows, a.cols))
    fail("IdenticallySingular", "symbol is singular at every sampled point");
  if (!allow_kernel && r == 0) fail("IdenticallySingular", "symbol vanishes identically");
  return r;
}

bool cauchy_flag(const std::vector<double> &s) {
  const double d1 = std::abs(s[1] - s[0]);
  const double d2 = std::abs(s[2] - s[1]);
  return d2 <= std::max(0.5 * d1, 1e-6 * (1.0 + std::abs(s[2])));
}

} // namespace

Complex vn_trace(const LaurentMatrix &a) {
  if (!a.is_square()) fail("NotSquare", "trace needs a square matrix");
  const auto it = a.terms.find(Exponent(static_cast<std::size_t>(a.d), 0));
  return it == a.terms.end() ? Complex(0.0) : it->second.trace();
}

DensityReport spectral_density_curve(const LaurentMatrix &a, std::span<const double> lambdas,
                                     const QuadraturePolicy &policy) {
  policy.validate();
  a.validate();
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) fail("GridOutOfRange", "lambda grid must be finite and >= 0");
  if (policy.mode == SingularMode::plain) return density_plain(a, lambdas, policy);
  return density_refine(a, lambdas, policy);
}

DensityReport spectral_density_curve(const ZdComplex &x, int p, std::span<const double> lambdas,
                                     const QuadraturePolicy &policy) {
  if (p < 0 || p > x.top_degree()) fail("DegreeOutOfRange", "degree " + std::to_string(p));
  DensityReport r = spectral_density_curve(x.differential(p), lambdas, policy);
  // sigma(c_p) = restricted values plus rank(c_{p-1}(z)) zeros from im c_{p-1}
  const double zero = 0.0;
  const DensityReport prev = spectral_density_curve(x.differential(p - 1), std::span(&zero, 1), policy);
  const double image_rank = static_cast<double>(x.rank(p - 1)) - prev.betti;
  for (std::size_t j = 0; j < r.values.size(); ++j) {
    r.values[j] -= image_rank;
    r.errors[j] += prev.errors.empty() ? 0.0 : prev.errors[0];
  }
  r.betti -= image_rank;
  return r;
}

double betti_zd(const LaurentMatrix &a, const QuadraturePolicy &policy) {
  const double zero = 0.0;
  return spectral_density_curve(a, std::span(&zero, 1), policy).betti;
}

double betti_zd(const ZdComplex &x, int p, const QuadraturePolicy &policy) {
  const double zero = 0.0;
  return spectral_density_curve(x, p, std::span(&zero, 1), policy).betti;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) fail("GridOutOfRange", "log grid needs 0 < lo <= hi");
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

NsFit ns_fit(const DensityReport &curve, double lo, double hi) {
  std::vector<double> xs, ys;
  bool gap = false;
  for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
    const double l = curve.lambdas[j];
    if (!(l >= lo && l <= hi) || !(l > 0.0)) continue;
    const double fhat = curve.values[j] - curve.betti;
    if (!(fhat > 0.0)) {
      gap = true;
      continue;
    }
    xs.push_back(std::log(l));
    ys.push_back(std::log(fhat));
  }
  NsFit fit;
  if (xs.size() + (gap ? 1 : 0) < 3) {
    std::size_t n = 0;
    for (double l : curve.lambdas)
      if (l >= lo && l <= hi && l > 0.0) ++n;
    if (n < 3) fail("InsufficientPoints", "need at least 3 curve points in the window");
  }
  if (gap) {
    fit.points = xs.size();
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) fail("InsufficientPoints", "window points are not distinct");
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = xs.size();
  return fit;
}

NsFit ns_estimate(const ZdComplex &x, int p, const QuadraturePolicy &policy, double lo, double hi,
                  std::size_t points) {
  const std::vector<double> grid = log_grid(lo, hi, points);
  QuadraturePolicy relative = policy;
  relative.density_rel_tol = policy.ns_rel_tol;
  relative.density_abs_tol = std::numeric_limits<double>::min();
  return ns_fit(spectral_density_curve(x, p, grid, relative), lo, hi);
}

Index generic_rank(const LaurentMatrix &a) {
  if (a.rows == 0 || a.cols == 0) return 0;
  Index r = 0;
  for (const auto &theta : sample_points(a.d)) r = std::max(r, numerical_rank(symbol_at_angles(a, theta)));
  return r;
}

FkReport fk_log_det_report(const LaurentMatrix &a, const QuadraturePolicy &policy, bool allow_kernel) {
  policy.validate();
  a.validate();
  if (!a.is_square()) fail("NotSquare", "Fuglede-Kadison determinant needs a square matrix");
  FkReport rep;
  rep.generic_rank = checked_rank(a, allow_kernel);
  if (rep.generic_rank == 0) return rep;
  const Index r = rep.generic_rank;
  const double floor = std::max(std::numeric_limits<double>::epsilon() * l1_norm(a), std::numeric_limits<double>::min());
  const IntegralEstimate e = integrate_symbol(
      a, policy, [r, floor](const RVector &s) { return log_det_prime(s, r, floor); }, r - 1, policy.mode);
  if (!std::isfinite(e.value))
    throw QuadratureNotConverged("log-determinant integral is not finite", e.value, kInfinityPlus);
  rep.value = e.value;
  rep.error = e.error;
  rep.evaluations = e.evaluations;
  return rep;
}

double fk_log_det(const LaurentMatrix &a, const QuadraturePolicy &policy) {
  return fk_log_det_report(a, policy, false).value;
}

double fk_log_det_prime(const LaurentMatrix &a, const QuadraturePolicy &policy) {
  return fk_log_det_report(a, policy, true).value;
}

DetClassReport det_class_check(const LaurentMatrix &a, const QuadraturePolicy &policy, bool allow_kernel) {
  a.validate();
  DetClassReport rep;
  rep.cutoffs = {1e-2, 1e-4, 1e-6};
  if (checked_rank(a, allow_kernel) == 0) {
    rep.flag = true;
    rep.partial_sums.assign(3, 0.0);
    return rep;
  }
  constexpr int kPerDecade = 16;
  constexpr int kDecades = 6;
  std::vector<double> grid;
  for (int i = 0; i <= kPerDecade * kDecades; ++i)
    grid.push_back(std::pow(10.0, -kDecades + static_cast<double>(i) / kPerDecade));
  grid.back() = 1.0;
  const DensityReport curve = spectral_density_curve(a, grid, policy);
  auto fhat = [&](std::size_t i) { return std::max(curve.values[i] - curve.betti, 0.0); };

  // S(eps) = -ln(eps) Fhat(eps) - int_{ln eps}^0 Fhat(e^u) du
  const double du = std::log(10.0) / kPerDecade;
  const std::size_t last = grid.size() - 1;
  for (int decades : {2, 4, 6}) {
    const std::size_t start = last - static_cast<std::size_t>(decades * kPerDecade);
    std::vector<double> terms;
    // Composite Simpson; every window spans an even number of steps.
    for (std::size_t i = start; i < last; i += 2)
      terms.push_back(du / 3.0 * (fhat(i) + 4.0 * fhat(i + 1) + fhat(i + 2)));
    const double integral = stable_sum(terms);
    rep.partial_sums.push_back(-std::log(grid[start]) * fhat(start) - integral);
  }
  rep.flag = cauchy_flag(rep.partial_sums);
  rep.integral = rep.partial_sums.back();
  return rep;
}

DetClassReport det_class_heat_check(const LaurentMatrix &a, const QuadraturePolicy &policy,
                                    bool allow_kernel) {
  policy.validate();
  a.validate();
  DetClassReport rep;
  rep.cutoffs = {1e2, 1e4, 1e6};
  const Index r = checked_rank(a, allow_kernel);
  if (r == 0) {
    rep.flag = true;
    rep.partial_sums.assign(3, 0.0);
    return rep;
  }
  // int_1^T t^{-1} e^{-t mu} dt = E1(mu) - E1(T mu), mu = sigma^2
  const SingularMode mode = policy.mode == SingularMode::plain ? SingularMode::plain : SingularMode::refine;
  for (double T : rep.cutoffs) {
    auto f = [T](const RVector &s) {
      const double thr = zero_threshold(s.size() ? s(0) : 0.0);
      double acc = 0.0;
      for (Index i = 0; i < s.size(); ++i) {
        if (s(i) <= thr) continue;
        const double mu = s(i) * s(i);
        acc += boost::math::expint(1, mu) - (T * mu < 700.0 ? boost::math::expint(1, T * mu) : 0.0);
      }
      return acc;
    };
    rep.partial_sums.push_back(integrate_symbol(a, policy, f, r - 1, mode).value);
  }
  rep.flag = cauchy_flag(rep.partial_sums);
  rep.integral = rep.partial_sums.back();
  return rep;
}

double heat_trace_zd(const LaurentMatrix &a, double t, const QuadraturePolicy &policy) {
  a.validate();
  if (!is_hermitian(a)) fail("NotHermitian", "heat trace needs a Hermitian symbol");
  if (!(t > 0.0) || !std::isfinite(t)) fail("InvalidArgument", "heat time must be positive");
  return grid_mean_converged(a.d, policy, [&](std::span<const double> theta) {
           CMatrix h = symbol_at_angles(a, theta);
           h = 0.5 * (h + h.adjoint()).eval();
           const RVector ev = hermitian_eigenvalues(h);
           double acc = 0.0;
           for (Index i = 0; i < ev.size(); ++i) acc += std::exp(-t * ev(i));
           return acc;
         }).value;
}

LaurentMatrix twist(const LaurentMatrix &a, const TwistedRep &rho) {
  if (rho.d != a.d)
    fail("RankMismatch", "representation has rank " + std::to_string(rho.d) + ", matrix has " +
                             std::to_string(a.d));
  const Index m = rho.dim();
  LaurentMatrix out(a.d, a.rows * m, a.cols * m);
  for (const auto &[g, block] : a.terms) out.add(g, kron(block, rep_at(rho, g)));
  return out;
}

ZdComplex twist_complex(const ZdComplex &x, const TwistedRep &rho) {
  if (rho.d != x.d())
    fail("RankMismatch", "representation has rank " + std::to_string(rho.d) + ", complex has " +
                             std::to_string(x.d()));
  if (x.differentials().empty()) {
    std::vector<Index> ranks = x.ranks();
    for (Index &r : ranks) r *= rho.dim();
    return ZdComplex::zero(x.d(), ranks);
  }
  std::vector<LaurentMatrix> diffs;
  for (const LaurentMatrix &c : x.differentials()) diffs.push_back(twist(c, rho));
  return ZdComplex(x.d(), std::move(diffs));
}

ZdTorsionReport torsion_zd_report(const ZdComplex &x, const QuadraturePolicy &policy) {
  ZdTorsionReport rep;
  std::vector<double> terms;
  for (int n = 0; n <= x.top_degree(); ++n) {
    const LaurentMatrix lap = x.laplacian(n);
    if (generic_rank(lap) == 0) {
      rep.log_dets.push_back(0.0);
      continue;
    }
    const DetClassReport dc = det_class_check(lap, policy, true);
    if (!dc.flag)
      fail("NotDeterminantClass", "Laplacian in degree " + std::to_string(n) + " fails the Cauchy test");
    const double ld = fk_log_det_prime(lap, policy);
    rep.log_dets.push_back(ld);
    terms.push_back((n % 2 == 1 ? 1.0 : -1.0) * n * ld);
  }
  rep.log_torsion = 0.5 * stable_sum(terms);
  return rep;
}

double torsion_zd(const ZdComplex &x, const QuadraturePolicy &policy) {
  return torsion_zd_report(x, policy).log_torsion;
}

} // namespace l2inv
