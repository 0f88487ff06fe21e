#include "config.hpp"

#include "l2inv/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace l2inv::cli {

void Field::error(const std::string &what) const { throw ConfigError(path_ + ": " + what); }

bool Field::has(const std::string &key) const { return j_->is_object() && j_->contains(key); }

Field Field::at(const std::string &key) const {
  if (!j_->is_object()) error("expected an object");
  auto it = j_->find(key);
  if (it == j_->end()) throw ConfigError(path_ + "." + key + ": missing field");
  return Field(*it, path_ + "." + key);
}

Field Field::at(std::size_t i) const {
  if (!j_->is_array()) error("expected an array");
  if (i >= j_->size()) error("index " + std::to_string(i) + " out of range");
  return Field((*j_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Field::size() const {
  if (!j_->is_array()) error("expected an array");
  return j_->size();
}

double Field::number() const {
  if (j_->is_string()) {
    const std::string s = j_->get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  if (!j_->is_number()) error("expected a number");
  return j_->get<double>();
}

long long Field::integer() const {
  if (!j_->is_number_integer()) error("expected an integer");
  return j_->get<long long>();
}

std::string Field::string() const {
  if (!j_->is_string()) error("expected a string");
  return j_->get<std::string>();
}

bool Field::boolean() const {
  if (!j_->is_boolean()) error("expected true or false");
  return j_->get<bool>();
}

Complex Field::complex() const {
  if (j_->is_number()) return {j_->get<double>(), 0.0};
  if (j_->is_array() && j_->size() == 2 && (*j_)[0].is_number() && (*j_)[1].is_number())
    return {(*j_)[0].get<double>(), (*j_)[1].get<double>()};
  error("expected a number or a [re, im] pair");
}

std::vector<double> Field::numbers() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
  return out;
}

std::vector<int> Field::integers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(static_cast<int>(at(i).integer()));
  return out;
}

namespace {

template <class T> T checked(const Field &f, const std::function<T()> &build) {
  try {
    return build();
  } catch (const Error &e) {
    throw ConfigError(f.path() + ": " + e.kind() + ": " + e.what());
  }
}

} // namespace

// Rows of entries; an empty matrix needs explicit "rows"/"cols".
CMatrix parse_matrix(const Field &f) {
  if (f.json().is_object()) {
    const Index rows = f.at("rows").integer();
    const Index cols = f.at("cols").integer();
    if (rows < 0 || cols < 0) f.error("negative shape");
    CMatrix m = CMatrix::Zero(rows, cols);
    if (f.has("entries")) {
      const Field e = f.at("entries");
      if (static_cast<Index>(e.size()) != rows) e.error("expected " + std::to_string(rows) + " rows");
      for (Index i = 0; i < rows; ++i) {
        const Field row = e.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != cols) row.error("expected " + std::to_string(cols) + " entries");
        for (Index j = 0; j < cols; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).complex();
      }
    }
    return m;
  }
  const std::size_t rows = f.size();
  if (rows == 0) f.error("empty matrix needs {\"rows\", \"cols\"}");
  const std::size_t cols = f.at(0).size();
  CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Field row = f.at(i);
    if (row.size() != cols) row.error("ragged row, expected " + std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = row.at(j).complex();
  }
  return m;
}

FiniteComplex parse_finite_complex(const Field &f) {
  if (f.has("dims")) {
    std::vector<Index> dims;
    for (int v : f.at("dims").integers()) dims.push_back(v);
    return checked<FiniteComplex>(f, [&] { return FiniteComplex::zero(dims); });
  }
  const Field d = f.at("differentials");
  std::vector<CMatrix> diffs;
  for (std::size_t i = 0; i < d.size(); ++i) diffs.push_back(parse_matrix(d.at(i)));
  return checked<FiniteComplex>(f, [&] { return FiniteComplex(diffs); });
}

namespace {

Exponent parse_exponent(const Field &f, int d) {
  Exponent g = f.integers();
  if (static_cast<int>(g.size()) != d) f.error("exponent needs " + std::to_string(d) + " entries");
  return g;
}

} // namespace

LaurentMatrix parse_laurent(const Field &f) {
  const int d = static_cast<int>(f.at("d").integer());
  const Index rows = f.has("rows") ? f.at("rows").integer() : 1;
  const Index cols = f.has("cols") ? f.at("cols").integer() : 1;
  LaurentMatrix a = checked<LaurentMatrix>(f, [&] { return LaurentMatrix(d, rows, cols); });
  const Field terms = f.at("terms");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Field t = terms.at(i);
    const Exponent g = parse_exponent(t.at("exponent"), d);
    CMatrix block;
    if (t.has("coefficient")) {
      block = CMatrix::Constant(1, 1, t.at("coefficient").complex());
    } else {
      block = parse_matrix(t.at("matrix"));
    }
    if (block.rows() != rows || block.cols() != cols)
      t.error("block is " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) + ", expected " +
              std::to_string(rows) + "x" + std::to_string(cols));
    a.add(g, block);
  }
  checked<int>(f, [&] {
    a.validate();
    return 0;
  });
  return a;
}

GammaCW parse_gamma_cw(const Field &f) {
  if (f.has("builtin")) {
    const std::string name = f.at("builtin").string();
    if (name == "circle") return circle();
    if (name == "torus") {
      const int k = static_cast<int>(f.at("k").integer());
      return checked<GammaCW>(f, [&] { return torus(k); });
    }
    f.at("builtin").error("unknown builtin '" + name + "' (circle, torus)");
  }
  const int d = static_cast<int>(f.at("d").integer());
  std::vector<Index> cells;
  for (int c : f.at("cells").integers()) cells.push_back(c);
  std::vector<IntLaurentMatrix> diffs;
  const Field df = f.at("differentials");
  for (std::size_t p = 0; p < df.size(); ++p) {
    const Field dp = df.at(p);
    if (p + 1 >= cells.size()) dp.error("more differentials than cell degrees");
    IntLaurentMatrix m = checked<IntLaurentMatrix>(dp, [&] { return IntLaurentMatrix(d, cells[p + 1], cells[p]); });
    const Field terms = dp.at("terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Field t = terms.at(i);
      const Exponent g = parse_exponent(t.at("exponent"), d);
      const Field entries = t.at("entries");
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const Field en = entries.at(e);
        if (en.size() != 3) en.error("expected [row, col, coefficient]");
        const long long r = en.at(0).integer(), c = en.at(1).integer(), v = en.at(2).integer();
        checked<int>(en, [&] {
          m.add(g, static_cast<Index>(r), static_cast<Index>(c), v);
          return 0;
        });
      }
    }
    diffs.push_back(std::move(m));
  }
  return checked<GammaCW>(f, [&] { return GammaCW(d, cells, diffs); });
}

TwistedRep parse_rep(const Field &f, int d) {
  if (f.has("trivial")) {
    const Index m = f.at("trivial").integer();
    return checked<TwistedRep>(f, [&] { return trivial_rep(d, m); });
  }
  std::vector<CMatrix> gens;
  if (f.has("character")) {
    const std::vector<double> phi = f.at("character").numbers();
    for (double a : phi) gens.push_back(CMatrix::Constant(1, 1, std::polar(1.0, a)));
  } else {
    const Field g = f.at("generators");
    for (std::size_t i = 0; i < g.size(); ++i) gens.push_back(parse_matrix(g.at(i)));
  }
  if (static_cast<int>(gens.size()) != d) f.error("representation needs " + std::to_string(d) + " generators");
  return checked<TwistedRep>(f, [&] { return make_twisted_rep(gens); });
}

namespace {

std::pair<std::vector<double>, std::vector<double>> read_two_columns(const Field &f, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) f.error("cannot open '" + path.string() + "'");
  std::vector<double> ts, vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t = 0.0, v = 0.0;
    if (!(row >> t >> v)) {
      if (ts.empty()) continue; // header
      f.error(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    ts.push_back(t);
    vs.push_back(v);
  }
  return {ts, vs};
}

// Sum of weight t^{-power} e^{-rate t} terms.
HeatTrace parse_closed_form(const Field &f) {
  struct Term {
    double w, q, mu;
  };
  std::vector<Term> terms;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Field t = f.at(i);
    terms.push_back({t.at("weight").number(), t.has("power") ? t.at("power").number() : 0.0,
                     t.has("rate") ? t.at("rate").number() : 0.0});
  }
  return HeatTrace::callable([terms](double t) {
    double s = 0.0;
    for (const Term &term : terms) s += term.w * std::pow(t, -term.q) * std::exp(-term.mu * t);
    return s;
  });
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> parse_table(const Field &f, const std::filesystem::path &base_dir) {
  if (f.has("csv")) {
    const std::filesystem::path p = f.at("csv").string();
    return read_two_columns(f.at("csv"), p.is_absolute() ? p : base_dir / p);
  }
  std::vector<double> ts = f.at("t").numbers();
  std::vector<double> vs = f.at("theta").numbers();
  if (ts.size() != vs.size()) f.error("t and theta differ in length");
  return {ts, vs};
}

HeatTraceModel parse_heat_model(const Field &f, const std::filesystem::path &base_dir) {
  HeatTraceModel model;
  if (f.has("builtin")) {
    const std::string name = f.at("builtin").string();
    if (name == "circle") {
      const double length = f.at("length").number();
      model = checked<HeatTraceModel>(f, [&] { return free_space_model(1, length); });
    } else if (name == "free_space") {
      const int n = static_cast<int>(f.at("n").integer());
      const double vol = f.at("volume").number();
      model = checked<HeatTraceModel>(f, [&] { return free_space_model(n, vol); });
    } else {
      f.at("builtin").error("unknown builtin '" + name + "' (circle, free_space)");
    }
  } else {
    model.n = static_cast<int>(f.at("n").integer());
    const Field degrees = f.at("degrees");
    for (std::size_t p = 0; p < degrees.size(); ++p) {
      const Field dp = degrees.at(p);
      HeatTrace h;
      if (dp.has("terms")) {
        h = parse_closed_form(dp.at("terms"));
      } else {
        auto [ts, vs] = parse_table(dp, base_dir);
        h = checked<HeatTrace>(dp, [&] { return HeatTrace::table(ts, vs); });
      }
      if (dp.has("kappas")) h.kappas = dp.at("kappas").numbers();
      h.label = "degree " + std::to_string(p);
      model.degrees.push_back(std::move(h));
    }
    if (f.has("label")) model.label = f.at("label").string();
  }
  if (f.has("convention")) {
    const std::string c = f.at("convention").string();
    if (c == "standard") {
      model.convention = CoeffConvention::standard;
    } else if (c == "alternate") {
      model.convention = CoeffConvention::alternate;
    } else {
      f.at("convention").error("expected 'standard' or 'alternate'");
    }
  }
  if (f.has("require_positive_leading")) model.require_positive_leading = f.at("require_positive_leading").boolean();
  if (f.has("fit_kappas") && f.at("fit_kappas").boolean()) {
    const double window = f.has("window") ? f.at("window").number() : 0.1;
    model = checked<HeatTraceModel>(f, [&] { return with_fitted_kappas(model, window); });
  }
  return model;
}

CuspModel parse_cusp_model(const Field &f) {
  if (f.has("builtin")) {
    const std::string name = f.at("builtin").string();
    if (name == "h2_example") return h2_example();
    f.at("builtin").error("unknown builtin '" + name + "' (h2_example)");
  }
  const int n = static_cast<int>(f.at("n").integer());
  const std::vector<double> cs = f.at("cross_sections").numbers();
  const double core = f.has("core_volume") ? f.at("core_volume").number() : 0.0;
  return checked<CuspModel>(f, [&] { return make_cusp_model(n, cs, core); });
}

AnomalyLedger load_ledger(const Field &f, const std::filesystem::path &base_dir) {
  if (f.has("path")) {
    const std::filesystem::path p = f.at("path").string();
    const std::filesystem::path full = p.is_absolute() ? p : base_dir / p;
    std::ifstream in(full);
    if (!in) f.at("path").error("cannot open '" + full.string() + "'");
    return checked<AnomalyLedger>(f, [&] { return read_ledger_csv(in); });
  }
  AnomalyLedger ledger;
  const Field rows = f.at("rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Field r = rows.at(i);
    LedgerRow row;
    row.r = r.at("R").number();
    auto opt = [&](const char *key) -> std::optional<double> {
      if (!r.has(key) || r.at(key).json().is_null()) return std::nullopt;
      return r.at(key).number();
    };
    row.log_an_rho = opt("logTan_rho");
    row.log_an_trivial = opt("logTan_triv");
    row.log_top_trivial = opt("logTtop_triv");
    row.dim_rho = opt("dim_rho");
    ledger.rows.push_back(row);
  }
  checked<int>(f, [&] {
    ledger.validate();
    return 0;
  });
  return ledger;
}

void apply_policy(const Field &f, QuadraturePolicy &p) {
  if (!f.json().is_object()) f.error("expected an object");
  for (const auto &[key, value] : f.json().items()) {
    const Field v = f.at(key);
    if (key == "base_n") {
      p.base_n = static_cast<int>(v.integer());
    } else if (key == "levels") {
      p.levels = static_cast<int>(v.integer());
    } else if (key == "rel_tol") {
      p.rel_tol = v.number();
    } else if (key == "abs_tol") {
      p.abs_tol = v.number();
    } else if (key == "density_rel_tol") {
      p.density_rel_tol = v.number();
    } else if (key == "density_abs_tol") {
      p.density_abs_tol = v.number();
    } else if (key == "ns_rel_tol") {
      p.ns_rel_tol = v.number();
    } else if (key == "mode") {
      p.mode = checked<SingularMode>(v, [&] { return parse_singular_mode(v.string()); });
    } else if (key == "max_depth") {
      p.max_depth = static_cast<int>(v.integer());
    } else if (key == "max_evaluations") {
      p.max_evaluations = v.integer();
    } else {
      v.error("unknown policy field");
    }
  }
  checked<int>(f, [&] {
    p.validate();
    return 0;
  });
}

JobConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  JobConfig cfg;
  cfg.raw = text;
  cfg.base_dir = base_dir;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error &e) {
    // byte offset -> line:column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": invalid JSON");
  }
  const Field root(doc, "$");
  if (!doc.is_object()) root.error("expected an object");
  for (const auto &[key, value] : doc.items()) {
    if (std::find(kInputKinds.begin(), kInputKinds.end(), key) != kInputKinds.end()) {
      if (!cfg.input_kind.empty()) root.error("more than one input object ('" + cfg.input_kind + "', '" + key + "')");
      cfg.input_kind = key;
      cfg.input = value;
    } else if (key == "rep" || key == "params" || key == "policy" || key == "output" || key == "seed" ||
               key == "subcommand") {
    } else {
      root.at(key).error("unknown field");
    }
  }
  if (doc.contains("rep") && cfg.input_kind != "gamma_cw") root.at("rep").error("only valid with gamma_cw");
  if (doc.contains("subcommand")) cfg.subcommand = root.at("subcommand").string();
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) root.at("params").error("expected an object");
    cfg.params = doc["params"];
  }
  if (doc.contains("policy")) apply_policy(root.at("policy"), cfg.policy);
  if (doc.contains("output")) cfg.output = root.at("output").string();
  if (doc.contains("seed")) {
    const long long s = root.at("seed").integer();
    if (s < 0) root.at("seed").error("expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("rep")) cfg.rep = doc["rep"];
  return cfg;
}

std::vector<double> parse_grid(const std::string &text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3) throw ConfigError("--grid: expected a:b:n, got '" + text + "'");
  double a = 0.0, b = 0.0;
  long long n = 0;
  try {
    std::size_t used = 0;
    a = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    b = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    n = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::exception &) {
    throw ConfigError("--grid: expected a:b:n, got '" + text + "'");
  }
  if (n < 1 || (n == 1 && a != b) || !(b >= a)) throw ConfigError("--grid: need n >= 1 and a <= b");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

Json to_json(const QuadraturePolicy &p) {
  return Json{{"base_n", p.base_n},
              {"levels", p.levels},
              {"rel_tol", p.rel_tol},
              {"abs_tol", p.abs_tol},
              {"density_rel_tol", p.density_rel_tol},
              {"density_abs_tol", p.density_abs_tol},
              {"ns_rel_tol", p.ns_rel_tol},
              {"mode", to_string(p.mode)},
              {"max_depth", p.max_depth},
              {"max_evaluations", p.max_evaluations}};
}

std::string describe(const QuadraturePolicy &p) {
  std::string out;
  const Json j = to_json(p);
  for (const auto &[key, value] : j.items()) {
    if (!out.empty()) out += ' ';
    out += key + '=' + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  return out;
}

} // namespace l2inv::cli
