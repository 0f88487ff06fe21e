#pragma once

#include "l2inv/cusp.hpp"
#include "l2inv/cwcomplex.hpp"
#include "l2inv/fincomplex.hpp"
#include "l2inv/heatzeta.hpp"
#include "l2inv/laurent.hpp"
#include "l2inv/pnfb.hpp"
#include "l2inv/quadrature.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace l2inv::cli {

using Json = nlohmann::json;

/// Malformed or inconsistent job configuration (exit status 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string &message) : std::runtime_error(message) {}
};

/// The input kinds a job may carry; exactly one per config.
inline const std::vector<std::string> kInputKinds{"finite_complex", "laurent_matrix", "gamma_cw",  "heat_trace_model",
                                                  "heat_table",     "cusp_model",     "ledger",    "pnfb"};

struct JobConfig {
  std::string subcommand;
  std::string input_kind; ///< empty when the subcommand needs no input
  Json input;
  Json rep; ///< representation for gamma_cw inputs; null means trivial of rank 1
  Json params = Json::object();
  QuadraturePolicy policy;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::filesystem::path base_dir;
  std::string raw; ///< config bytes as read
};

/// Parses the document; JSON syntax errors carry line and column.
JobConfig parse_config(const std::string &text, const std::filesystem::path &base_dir);

/// Field accessor that reports the dotted path of missing or mistyped fields.
class Field {
public:
  Field(const Json &j, std::string path) : j_(&j), path_(std::move(path)) {}
  const Json &json() const { return *j_; }
  const std::string &path() const { return path_; }
  bool has(const std::string &key) const;
  Field at(const std::string &key) const;
  Field at(std::size_t i) const;
  std::size_t size() const;
  double number() const;
  long long integer() const;
  std::string string() const;
  bool boolean() const;
  Complex complex() const;
  std::vector<double> numbers() const;
  std::vector<int> integers() const;
  [[noreturn]] void error(const std::string &what) const;

private:
  const Json *j_;
  std::string path_;
};

CMatrix parse_matrix(const Field &f);
FiniteComplex parse_finite_complex(const Field &f);
LaurentMatrix parse_laurent(const Field &f);
GammaCW parse_gamma_cw(const Field &f);
TwistedRep parse_rep(const Field &f, int d);
HeatTraceModel parse_heat_model(const Field &f, const std::filesystem::path &base_dir);
/// Inline {"t", "theta"} arrays or {"csv": path} with two columns.
std::pair<std::vector<double>, std::vector<double>> parse_table(const Field &f, const std::filesystem::path &base_dir);
CuspModel parse_cusp_model(const Field &f);
AnomalyLedger load_ledger(const Field &f, const std::filesystem::path &base_dir);
void apply_policy(const Field &f, QuadraturePolicy &policy);

/// "a:b:n" -> n evenly spaced points from a to b inclusive.
std::vector<double> parse_grid(const std::string &text);

/// Single-line description of the policy for CSV comment lines.
std::string describe(const QuadraturePolicy &p);
Json to_json(const QuadraturePolicy &p);

} // namespace l2inv::cli
