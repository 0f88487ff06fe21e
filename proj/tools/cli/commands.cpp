#include "commands.hpp"

#include "l2inv/cusp.hpp"
#include "l2inv/error.hpp"
#include "l2inv/fincomplex.hpp"
#include "l2inv/heatzeta.hpp"
#include "l2inv/pnfb.hpp"
#include "l2inv/verify.hpp"
#include "l2inv/zd.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace l2inv::cli {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(double v) { return number(v); }
std::string cell(Index v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

std::string exponent_cell(const Exponent &g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) out += (i ? ";" : "") + std::to_string(g[i]);
  return out;
}

void expect(const JobConfig &cfg, std::initializer_list<const char *> kinds) {
  for (const char *k : kinds)
    if (cfg.input_kind == k) return;
  std::string list;
  for (const char *k : kinds) list += std::string(list.empty() ? "" : ", ") + k;
  throw ConfigError("$: '" + cfg.subcommand + "' needs one of these inputs: " + list +
                    (cfg.input_kind.empty() ? " (none given)" : " (got " + cfg.input_kind + ")"));
}

Field input(const JobConfig &cfg) { return Field(cfg.input, "$." + cfg.input_kind); }
Field params(const JobConfig &cfg) { return Field(cfg.params, "$.params"); }

std::optional<int> param_int(const JobConfig &cfg, const std::string &key) {
  const Field p = params(cfg);
  if (!p.has(key)) return std::nullopt;
  return static_cast<int>(p.at(key).integer());
}

double param_num(const JobConfig &cfg, const std::string &key, double fallback) {
  const Field p = params(cfg);
  return p.has(key) ? p.at(key).number() : fallback;
}

bool param_bool(const JobConfig &cfg, const std::string &key, bool fallback) {
  const Field p = params(cfg);
  return p.has(key) ? p.at(key).boolean() : fallback;
}

// --grid wins over params.<key>, which wins over the default grid.
std::vector<double> grid_of(const JobConfig &cfg, const Flags &flags, const std::string &key,
                            const std::string &fallback) {
  if (flags.grid) return *flags.grid;
  const Field p = params(cfg);
  if (p.has(key)) return p.at(key).numbers();
  return parse_grid(fallback);
}

ZdComplex zd_complex(const JobConfig &cfg) {
  const GammaCW x = parse_gamma_cw(input(cfg));
  const TwistedRep rho = cfg.rep.is_null() ? trivial_rep(x.d(), 1) : parse_rep(Field(cfg.rep, "$.rep"), x.d());
  return assemble(x, rho);
}

std::vector<int> degrees(const JobConfig &cfg, int top) {
  if (auto p = param_int(cfg, "p")) {
    if (*p < 0 || *p > top) params(cfg).at("p").error("degree outside 0.." + std::to_string(top));
    return {*p};
  }
  std::vector<int> all;
  for (int p = 0; p <= top; ++p) all.push_back(p);
  return all;
}

void density_rows(Table &t, const DensityReport &r) {
  t.header = {"lambda", "F", "Fhat", "error"};
  for (std::size_t j = 0; j < r.values.size(); ++j)
    t.rows.push_back({cell(r.lambdas[j]), cell(r.values[j]), cell(r.values[j] - r.betti),
                      cell(r.errors.empty() ? 0.0 : r.errors[j])});
  t.summary["betti"] = r.betti;
}

Table fk_det(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"laurent_matrix"});
  const LaurentMatrix a = parse_laurent(input(cfg));
  const FkReport r = fk_log_det_report(a, cfg.policy, param_bool(cfg, "allow_kernel", false));
  Table t;
  t.header = {"log_det", "error", "evaluations", "generic_rank"};
  t.rows.push_back({cell(r.value), cell(r.error), cell(r.evaluations), cell(r.generic_rank)});
  return t;
}

Table density(JobConfig &cfg, const Flags &flags, std::ostream &) {
  expect(cfg, {"laurent_matrix", "gamma_cw", "finite_complex"});
  const std::vector<double> grid = grid_of(cfg, flags, "lambdas", "0:2:64");
  Table t;
  if (cfg.input_kind == "laurent_matrix") {
    density_rows(t, spectral_density_curve(parse_laurent(input(cfg)), grid, cfg.policy));
  } else if (cfg.input_kind == "gamma_cw") {
    const ZdComplex x = zd_complex(cfg);
    density_rows(t, spectral_density_curve(x, param_int(cfg, "p").value_or(0), grid, cfg.policy));
  } else {
    const FiniteComplex c = parse_finite_complex(input(cfg));
    density_rows(t, spectral_density(c, param_int(cfg, "p").value_or(0), grid));
  }
  return t;
}

Table ns(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"laurent_matrix", "gamma_cw", "finite_complex"});
  const double lo = param_num(cfg, "lo", 1e-4), hi = param_num(cfg, "hi", 1e-1);
  const int points = param_int(cfg, "points").value_or(13);
  if (points < 3) params(cfg).at("points").error("need at least 3 points");
  Table t;
  t.header = {"degree", "alpha", "r_squared", "intercept", "points"};
  auto row = [&](int p, const NsFit &f) {
    t.rows.push_back({cell(p), cell(f.alpha), cell(f.r_squared), cell(f.intercept), cell(static_cast<Index>(f.points))});
  };
  if (cfg.input_kind == "laurent_matrix") {
    QuadraturePolicy relative = cfg.policy;
    relative.density_rel_tol = cfg.policy.ns_rel_tol;
    relative.density_abs_tol = std::numeric_limits<double>::min();
    const std::vector<double> grid = log_grid(lo, hi, static_cast<std::size_t>(points));
    row(0, ns_fit(spectral_density_curve(parse_laurent(input(cfg)), grid, relative), lo, hi));
  } else if (cfg.input_kind == "gamma_cw") {
    const ZdComplex x = zd_complex(cfg);
    for (int p : degrees(cfg, x.top_degree()))
      row(p, ns_estimate(x, p, cfg.policy, lo, hi, static_cast<std::size_t>(points)));
  } else {
    const FiniteComplex c = parse_finite_complex(input(cfg));
    t.header = {"degree", "alpha"};
    for (int p : degrees(cfg, c.top_degree())) t.rows.push_back({cell(p), cell(novikov_shubin_finite(c, p))});
  }
  return t;
}

Table betti_cmd(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"laurent_matrix", "gamma_cw", "finite_complex"});
  Table t;
  t.header = {"degree", "betti"};
  if (cfg.input_kind == "laurent_matrix") {
    t.rows.push_back({"0", cell(betti_zd(parse_laurent(input(cfg)), cfg.policy))});
  } else if (cfg.input_kind == "gamma_cw") {
    const ZdComplex x = zd_complex(cfg);
    for (int p : degrees(cfg, x.top_degree())) t.rows.push_back({cell(p), cell(betti_zd(x, p, cfg.policy))});
  } else {
    const FiniteComplex c = parse_finite_complex(input(cfg));
    for (int p : degrees(cfg, c.top_degree())) t.rows.push_back({cell(p), cell(betti(c, p))});
  }
  return t;
}

Table torsion_fin(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"finite_complex"});
  Table t;
  t.header = {"log_torsion"};
  t.rows.push_back({cell(torsion_finite(parse_finite_complex(input(cfg))))});
  return t;
}

Table torsion_zd_cmd(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"gamma_cw"});
  const ZdTorsionReport r = torsion_zd_report(zd_complex(cfg), cfg.policy);
  Table t;
  t.header = {"degree", "log_det_laplacian"};
  for (std::size_t n = 0; n < r.log_dets.size(); ++n) t.rows.push_back({cell(static_cast<Index>(n)), cell(r.log_dets[n])});
  t.rows.push_back({"total", cell(r.log_torsion)});
  t.summary["log_torsion"] = r.log_torsion;
  return t;
}

Table assemble_cmd(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"gamma_cw"});
  const ZdComplex x = zd_complex(cfg);
  Table t;
  t.header = {"degree", "exponent", "row", "col", "re", "im"};
  for (int n = 0; n < x.top_degree(); ++n) {
    const LaurentMatrix m = x.differential(n);
    for (const auto &[g, block] : m.terms)
      for (Index i = 0; i < block.rows(); ++i)
        for (Index j = 0; j < block.cols(); ++j)
          if (block(i, j) != Complex(0.0))
            t.rows.push_back({cell(n), exponent_cell(g), cell(i), cell(j), cell(block(i, j).real()),
                              cell(block(i, j).imag())});
  }
  Json ranks = Json::array();
  for (Index r : x.ranks()) ranks.push_back(r);
  t.summary["ranks"] = ranks;
  return t;
}

Table induce_cmd(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"gamma_cw"});
  const Field p = params(cfg);
  const GammaCW x = parse_gamma_cw(input(cfg));
  const GammaCW y = induce(x, p.at("embed").integers(), static_cast<int>(p.at("d").integer()));
  Table t;
  t.header = {"degree", "exponent", "row", "col", "coefficient"};
  for (int n = 0; n < y.top_dimension(); ++n) {
    const IntLaurentMatrix m = y.differential(n);
    for (const auto &[g, block] : m.terms)
      for (Index i = 0; i < block.rows(); ++i)
        for (Index j = 0; j < block.cols(); ++j)
          if (block(i, j) != 0) t.rows.push_back({cell(n), exponent_cell(g), cell(i), cell(j), cell(block(i, j))});
  }
  Json cells = Json::array();
  for (Index c : y.cells()) cells.push_back(c);
  t.summary["cells"] = cells;
  t.summary["d"] = y.d();
  return t;
}

struct HeatInput {
  HeatTraceModel model;
  std::optional<double> volume;
};

HeatInput heat_input(JobConfig &cfg) {
  expect(cfg, {"heat_trace_model"});
  const Field f = input(cfg);
  HeatInput h{parse_heat_model(f, cfg.base_dir), std::nullopt};
  if (f.has("volume")) {
    h.volume = f.at("volume").number();
  } else if (f.has("length")) {
    h.volume = f.at("length").number();
  }
  return h;
}

Table zeta_estimates(JobConfig &cfg, bool small_time) {
  const HeatInput h = heat_input(cfg);
  Table t;
  t.header = {"degree", small_time ? "zeta_derivative" : "tail", "error"};
  for (int p : degrees(cfg, h.model.n)) {
    const ZetaEstimate e = small_time ? small_time_zeta_derivative(h.model, p) : large_time_integral(h.model, p);
    t.rows.push_back({cell(p), cell(e.value), cell(e.error)});
  }
  return t;
}

Table zeta_derivative(JobConfig &cfg, const Flags &, std::ostream &) { return zeta_estimates(cfg, true); }
Table tail(JobConfig &cfg, const Flags &, std::ostream &) { return zeta_estimates(cfg, false); }

Table torsion_analytic(JobConfig &cfg, const Flags &, std::ostream &) {
  const HeatInput h = heat_input(cfg);
  const TorsionBreakdown b = log_torsion(h.model);
  Table t;
  t.header = {"degree", "zeta_derivative", "tail", "error", "tau_per_volume"};
  for (std::size_t p = 0; p < b.zeta_derivatives.size(); ++p)
    t.rows.push_back({cell(static_cast<Index>(p)), cell(b.zeta_derivatives[p]), cell(b.tails[p]), cell(b.errors[p]), ""});
  double err = 0.0;
  for (double e : b.errors) err += e;
  t.rows.push_back({"total", "", "", cell(err), h.volume ? cell(b.total / *h.volume) : ""});
  t.comments.push_back("log_torsion=" + cell(b.total));
  t.summary["log_torsion"] = b.total;
  return t;
}

Table fit_kappa_cmd(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"heat_table", "heat_trace_model"});
  Table t;
  t.header = {"degree", "coefficient", "value"};
  const double window = param_num(cfg, "window", cfg.input_kind == "heat_table" ? 1.0 : 0.1);
  if (cfg.input_kind == "heat_table") {
    const Field f = input(cfg);
    const int n = static_cast<int>(f.at("n").integer());
    auto [ts, vs] = parse_table(f, cfg.base_dir);
    const KappaFit k = fit_kappa(ts, vs, n, window);
    const std::string deg = std::to_string(param_int(cfg, "p").value_or(0));
    for (std::size_t i = 0; i < k.kappas.size(); ++i)
      t.rows.push_back({deg, "kappa_" + std::to_string(i), cell(k.kappas[i])});
    t.rows.push_back({deg, "remainder", cell(k.remainder)});
    t.rows.push_back({deg, "residual", cell(k.residual)});
    t.rows.push_back({deg, "condition", cell(k.condition)});
    return t;
  }
  const HeatTraceModel m = with_fitted_kappas(heat_input(cfg).model, window);
  for (std::size_t p = 0; p < m.degrees.size(); ++p) {
    const auto &kappas = m.degrees[p].kappas;
    if (!kappas) continue;
    for (std::size_t i = 0; i < kappas->size(); ++i)
      t.rows.push_back({std::to_string(p), "kappa_" + std::to_string(i), cell((*kappas)[i])});
  }
  return t;
}

Table pnfb_report(JobConfig &cfg, const Flags &flags, std::ostream &) {
  expect(cfg, {"pnfb"});
  const Field f = input(cfg);
  const std::string kind = f.has("report") ? f.at("report").string() : "comparison";
  std::vector<double> ts = flags.grid ? *flags.grid : f.has("t") ? f.at("t").numbers() : std::vector<double>{};
  if (ts.empty()) {
    for (int k = 0; k <= 10; ++k) ts.push_back(std::ldexp(1.0, -k));
  }
  const std::vector<double> xs = f.has("x") ? f.at("x").numbers() : parse_grid("1:5:17");
  Table t;
  if (kind == "comparison") {
    const ComparisonReport r = boundary_comparison_report(f.has("d") ? f.at("d").number() : 1.0, ts, xs,
                                                          f.has("c") ? f.at("c").number() : 1.0,
                                                          f.has("kappa") ? f.at("kappa").number() : 2.0);
    t.header = {"t", "x", "difference", "bound", "ratio"};
    for (const ComparisonRow &row : r.rows)
      t.rows.push_back({cell(row.t), cell(row.x), cell(row.difference), cell(row.bound), cell(row.ratio)});
    t.comments.push_back("max_ratio=" + cell(r.max_ratio) + " passed=" + cell(r.passed));
    t.summary["max_ratio"] = r.max_ratio;
    t.summary["passed"] = r.passed;
  } else if (kind == "large_time") {
    const LargeTimeReport r = large_time_bound_report(f.at("t0").number(), ts, xs,
                                                      f.has("length") ? f.at("length").number() : 1.0,
                                                      f.has("images") ? static_cast<int>(f.at("images").integer()) : 32);
    t.header = {"geometry", "length", "max_value", "bound", "passed"};
    for (const LargeTimeEntry &e : r.entries)
      t.rows.push_back({to_string(e.kernel.geometry), cell(e.kernel.length), cell(e.max_value), cell(e.bound),
                        cell(e.passed)});
    t.comments.push_back("excluded_times=" + std::to_string(r.excluded) + " passed=" + cell(r.passed));
    t.summary["passed"] = r.passed;
  } else {
    f.at("report").error("expected 'comparison' or 'large_time'");
  }
  return t;
}

Table cusp_volumes(JobConfig &cfg, const Flags &flags, std::ostream &) {
  expect(cfg, {"cusp_model"});
  const CuspModel m = parse_cusp_model(input(cfg));
  const std::vector<double> rs = grid_of(cfg, flags, "R", "0:5:11");
  Table t;
  t.header = {"R", "vol_boundary", "vol_thick", "warp_factor"};
  for (double r : rs)
    t.rows.push_back({cell(r), cell(vol_boundary(m, r)), cell(vol_thick(m, r)), cell(warp_factor(m, r))});
  t.comments.push_back("total_volume=" + cell(total_volume(m)));
  t.summary["total_volume"] = total_volume(m);
  return t;
}

Table anomaly(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"ledger"});
  const AnomalyLedger ledger = load_ledger(input(cfg), cfg.base_dir);
  Table t;
  t.header = {"R", "combined"};
  for (const LedgerRow &row : ledger.rows) t.rows.push_back({cell(row.r), cell(anomaly_combine(row))});
  return t;
}

Table convergence(JobConfig &cfg, const Flags &, std::ostream &) {
  expect(cfg, {"ledger"});
  const ConvergenceReport r = convergence_report(load_ledger(input(cfg), cfg.base_dir));
  Table t;
  t.header = {"R", "value", "fitted", "residual"};
  for (std::size_t i = 0; i < r.r.size(); ++i)
    t.rows.push_back({cell(r.r[i]), cell(r.values[i]), cell(r.fitted[i]), cell(r.values[i] - r.fitted[i])});
  t.comments.push_back("limit=" + cell(r.limit) + " rate=" + cell(r.rate) + " amplitude=" + cell(r.amplitude) +
                       " rms_residual=" + cell(r.rms_residual) + " monotone=" + cell(r.monotone));
  t.summary = Json{{"limit", r.limit},
                   {"rate", cell(r.rate)},
                   {"amplitude", r.amplitude},
                   {"rms_residual", r.rms_residual},
                   {"monotone", r.monotone}};
  return t;
}

Table verify_cmd(JobConfig &cfg, const Flags &flags, std::ostream &log) {
  verify::Options opt;
  if (cfg.seed) opt.seed = *cfg.seed;
  cfg.seed = opt.seed;
  opt.policy = cfg.policy;
  opt.only = flags.only;
  const std::vector<verify::Criterion> results = verify::run_criteria(opt);
  Table t;
  t.header = {"criterion", "check", "value", "reference", "tolerance", "passed"};
  for (const auto &c : results) {
    log << verify::summary_line(c) << '\n';
    for (const auto &k : c.checks)
      t.rows.push_back({cell(c.id), k.name, cell(k.value), cell(k.reference), cell(k.tolerance), cell(k.passed)});
    if (!c.passed && (flags.strict || !verify::known_unattainable().count(c.id))) t.exit_code = 1;
  }
  log.flush();
  return t;
}

} // namespace

std::string cell(double v) { return number(v); }

const std::vector<CommandInfo> &commands() {
  static const std::vector<CommandInfo> list{
      {"fk-det", "Fuglede-Kadison log-determinant of a Laurent matrix", true, fk_det},
      {"density", "spectral density curve F(lambda)", true, density},
      {"ns", "Novikov-Shubin slope estimate", true, ns},
      {"betti", "L2-Betti numbers", true, betti_cmd},
      {"torsion-fin", "torsion of a finite complex", true, torsion_fin},
      {"torsion-zd", "L2-torsion of a twisted Z^d-complex", true, torsion_zd_cmd},
      {"assemble", "twisted chain complex of a Gamma-CW complex", true, assemble_cmd},
      {"induce", "induce a Gamma-CW complex along Z^d -> Z^d'", true, induce_cmd},
      {"zeta-derivative", "small-time zeta'(0) per degree", true, zeta_derivative},
      {"tail", "large-time integral per degree", true, tail},
      {"torsion-analytic", "analytic log-torsion of a heat-trace model", true, torsion_analytic},
      {"fit-kappa", "fit small-time expansion coefficients", true, fit_kappa_cmd},
      {"pnfb-report", "boundary heat-kernel comparison reports", true, pnfb_report},
      {"cusp-volumes", "thick and thin volumes of a cusped model", true, cusp_volumes},
      {"anomaly", "combine an anomaly ledger row by row", true, anomaly},
      {"convergence", "fit exponential convergence of a ledger", true, convergence},
      {"verify", "run the acceptance suite", false, verify_cmd},
  };
  return list;
}

void write_csv(std::ostream &out, const Table &t, const std::string &subcommand, const QuadraturePolicy &policy) {
  out << "# l2inv " << subcommand << " policy: " << describe(policy) << '\n';
  for (const std::string &c : t.comments) out << "# " << c << '\n';
  auto line = [&](const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      const std::string &v = cells[i];
      if (v.find_first_of(",\"\n") != std::string::npos) {
        out << '"';
        for (char ch : v) out << (ch == '"' ? "\"\"" : std::string(1, ch));
        out << '"';
      } else {
        out << v;
      }
    }
    out << '\n';
  };
  line(t.header);
  for (const auto &r : t.rows) line(r);
}

} // namespace l2inv::cli
