#include "l2inv/cusp.hpp"

#include "l2inv/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace l2inv {
namespace {

double cross_total(const CuspModel &m) {
  return std::accumulate(m.cross_sections.begin(), m.cross_sections.end(), 0.0);
}

struct LinearFit {
  double limit = 0.0;
  double amplitude = 0.0;
  double sse = 0.0;
};

// least squares y ~ L + B e^{-c (R - R0)} for fixed c
LinearFit fit_fixed_rate(const std::vector<double> &r, const std::vector<double> &y, double c) {
  const double r0 = r.front();
  const std::size_t n = r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::exp(-c * (r[i] - r0));
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  const double det = n * sxx - sx * sx;
  LinearFit f;
  if (std::abs(det) <= 1e-300) {
    f.limit = sy / n;
  } else {
    f.amplitude = (n * sxy - sx * sy) / det;
    f.limit = (sy - f.amplitude * sx) / n;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.limit - f.amplitude * std::exp(-c * (r[i] - r0));
    f.sse += e * e;
  }
  return f;
}

std::optional<double> parse_cell(const std::string &cell) {
  std::string s = cell;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception &) {
    fail("BadTable", "not a number: '" + s + "'");
  }
  if (pos != s.size()) fail("BadTable", "not a number: '" + s + "'");
  return v;
}

} // namespace

void CuspModel::validate() const {
  if (cross_sections.empty()) fail("InvalidArgument", "a cusp model needs at least one cusp");
  for (double v : cross_sections)
    if (!(v > 0.0) || !std::isfinite(v)) fail("InvalidArgument", "cross-section volumes must be positive");
  if (!(core_volume >= 0.0) || !std::isfinite(core_volume)) fail("InvalidArgument", "core volume must be non-negative");
  if (n < 2) fail("InvalidArgument", "dimension must be at least 2");
  if (!demo_only && (n < 3 || n % 2 == 0)) fail("NonOddDimension", "dimension " + std::to_string(n) + " is not odd");
}

CuspModel make_cusp_model(int n, std::vector<double> cross_sections, double core_volume) {
  CuspModel m{n, std::move(cross_sections), core_volume, false};
  m.validate();
  return m;
}

void require_odd_dimension(const CuspModel &model) {
  if (model.n < 3 || model.n % 2 == 0)
    fail("NonOddDimension", "torsion requires odd dimension, got " + std::to_string(model.n));
}

double vol_slab(const CuspModel &model, double r, double s) {
  model.validate();
  if (!(r >= 0.0) || !(s > r) || std::isnan(s)) fail("BadRange", "need 0 <= R < S");
  const double a = model.n - 1;
  // e^{-aR} - e^{-aS} = e^{-aR} (1 - e^{-a(S-R)})
  const double tail = std::isinf(s) ? 1.0 : -std::expm1(-a * (s - r));
  return cross_total(model) * std::exp(-a * r) * tail / a;
}

double vol_boundary(const CuspModel &model, double r) {
  model.validate();
  if (!(r >= 0.0)) fail("BadRange", "need R >= 0");
  return cross_total(model) * std::exp(-(model.n - 1) * r);
}

double vol_thick(const CuspModel &model, double r) {
  model.validate();
  if (!(r >= 0.0)) fail("BadRange", "need R >= 0");
  if (r == 0.0) return model.core_volume;
  return model.core_volume + vol_slab(model, 0.0, r);
}

double total_volume(const CuspModel &model) {
  model.validate();
  return model.core_volume + cross_total(model) / (model.n - 1);
}

double warp_factor(const CuspModel &model, double r) {
  return std::exp(-(model.n - 1) * (r - 1.0));
}

CuspModel h2_example() {
  // two ideal triangles of area pi; each cusp end beyond t = 0 has area 1
  return CuspModel{2, {1.0, 1.0, 1.0}, 2.0 * std::numbers::pi - 3.0, true};
}

void AnomalyLedger::validate() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].r > rows[i - 1].r)) fail("BadRange", "ledger R values must be strictly increasing");
}

AnomalyLedger read_ledger_csv(std::istream &in) {
  const std::vector<std::string> expected{"R", "logTan_rho", "logTan_triv", "logTtop_triv", "dim_rho"};
  std::string line;
  std::vector<int> column(expected.size(), -1);
  bool header = false;
  AnomalyLedger ledger;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        std::string name = cells[j];
        name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char ch) { return std::isspace(ch); }),
                   name.end());
        auto it = std::find(expected.begin(), expected.end(), name);
        if (it != expected.end()) column[it - expected.begin()] = static_cast<int>(j);
      }
      if (column[0] < 0) fail("BadTable", "ledger header lacks an R column");
      header = true;
      continue;
    }
    auto get = [&](int idx) -> std::optional<double> {
      const int j = column[idx];
      if (j < 0 || j >= static_cast<int>(cells.size())) return std::nullopt;
      return parse_cell(cells[j]);
    };
    LedgerRow row;
    const auto r = get(0);
    if (!r) fail("BadTable", "ledger row without R");
    row.r = *r;
    row.log_an_rho = get(1);
    row.log_an_trivial = get(2);
    row.log_top_trivial = get(3);
    row.dim_rho = get(4);
    ledger.rows.push_back(row);
  }
  if (!header) fail("BadTable", "empty ledger");
  ledger.validate();
  return ledger;
}

double anomaly_combine(const LedgerRow &row) {
  if (!row.log_an_rho) fail("MissingField", "logTan_rho");
  if (!row.dim_rho) fail("MissingField", "dim_rho");
  if (!row.log_an_trivial) fail("MissingField", "logTan_triv");
  if (!row.log_top_trivial) fail("MissingField", "logTtop_triv");
  return *row.log_an_rho + *row.dim_rho * (*row.log_top_trivial - *row.log_an_trivial);
}

ConvergenceReport convergence_report(const AnomalyLedger &ledger) {
  if (ledger.rows.size() < 3) fail("InsufficientData", "convergence needs at least 3 R values");
  ledger.validate();
  ConvergenceReport rep;
  for (const LedgerRow &row : ledger.rows) {
    if (!row.log_an_rho) fail("MissingField", "logTan_rho at R = " + std::to_string(row.r));
    rep.r.push_back(row.r);
    rep.values.push_back(*row.log_an_rho);
  }
  const auto [lo, hi] = std::minmax_element(rep.values.begin(), rep.values.end());
  const double scale = 1.0 + std::max(std::abs(*lo), std::abs(*hi));
  if (*hi - *lo <= 1e-14 * scale) {
    rep.limit = rep.values.back();
    rep.rate = std::numeric_limits<double>::infinity();
    rep.fitted.assign(rep.values.size(), rep.limit);
    return rep;
  }

  // scan log c for a bracket, then refine with Brent
  const double span = rep.r.back() - rep.r.front();
  const double lc_min = std::log(1e-3 / span);
  const double lc_max = std::log(700.0 / span);
  auto sse = [&](double lc) { return fit_fixed_rate(rep.r, rep.values, std::exp(lc)).sse; };
  const int scan = 200;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double v = sse(lc_min + (lc_max - lc_min) * i / scan);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double step = (lc_max - lc_min) / scan;
  const double a = lc_min + step * std::max(best - 1, 0);
  const double b = lc_min + step * std::min(best + 1, scan);
  const auto res = boost::math::tools::brent_find_minima(sse, a, b, 52);
  const double c = std::exp(res.first);
  const LinearFit f = fit_fixed_rate(rep.r, rep.values, c);
  rep.limit = f.limit;
  rep.rate = c;
  rep.amplitude = f.amplitude;
  rep.rms_residual = std::sqrt(f.sse / rep.values.size());
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    rep.fitted.push_back(f.limit + f.amplitude * std::exp(-c * (rep.r[i] - rep.r.front())));
    const double dev = std::abs(rep.values[i] - f.limit);
    if (dev > prev * (1.0 + 1e-12) + 1e-15 * scale) rep.monotone = false;
    prev = dev;
  }
  return rep;
}

void write_csv(std::ostream &out, const ConvergenceReport &report) {
  out << "R,value,fitted,residual\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.r.size(); ++i)
    out << report.r[i] << ',' << report.values[i] << ',' << report.fitted[i] << ','
        << report.values[i] - report.fitted[i] << '\n';
}

} // namespace l2inv
