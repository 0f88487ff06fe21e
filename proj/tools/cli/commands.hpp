#pragma once

#include "config.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace l2inv::cli {

/// A CSV result: header, rows of preformatted cells, extra comment lines
/// and a JSON summary for the metadata record.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
  Json summary = Json::object();
  int exit_code = 0;
};

struct Flags {
  std::optional<std::vector<double>> grid;
  std::optional<double> tol;
  std::set<int> only;
  bool strict = false;
};

using Command = std::function<Table(JobConfig &, const Flags &, std::ostream &log)>;

struct CommandInfo {
  std::string name;
  std::string help;
  bool needs_config;
  Command run;
};

const std::vector<CommandInfo> &commands();

/// %.17g, with inf, -inf and nan spelled out.
std::string cell(double v);

void write_csv(std::ostream &out, const Table &t, const std::string &subcommand, const QuadraturePolicy &policy);

} // namespace l2inv::cli
