#include "commands.hpp"
#include "config.hpp"

#include "l2inv/error.hpp"
#include "l2inv/parallel.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef L2INV_VERSION
#define L2INV_VERSION "0.0.0"
#endif

namespace {

using namespace l2inv::cli;

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Cli {
  std::string config_path;
  std::string out;
  std::string grid;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::vector<int> only;
  bool strict = false;
};

Json metadata(const std::string &sub, const JobConfig &cfg, const Flags &flags, const Cli &cli, const Table &t) {
  // hash the config bytes together with every flag that changes results
  std::string hashed = cfg.raw;
  hashed += "\n--grid=" + cli.grid;
  hashed += "\n--tol=" + (cli.tol ? cell(*cli.tol) : std::string());
  hashed += "\n--seed=" + (cli.seed ? std::to_string(*cli.seed) : std::string());
  hashed += "\n--only=";
  for (int id : flags.only) hashed += std::to_string(id) + ";";
  Json meta{{"subcommand", sub},
            {"version", L2INV_VERSION},
            {"input_sha256", sha256_hex(hashed)},
            {"input_kind", cfg.input_kind},
            {"policy", to_json(cfg.policy)},
            {"libraries",
             {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
                            "." + std::to_string(BOOST_VERSION % 100)}}},
            {"rows", t.rows.size()},
            {"summary", t.summary}};
  meta["seed"] = cfg.seed ? Json(*cfg.seed) : Json(nullptr);
  return meta;
}

int run(const CommandInfo &info, const Cli &cli) {
  JobConfig cfg;
  if (!cli.config_path.empty()) {
    const std::filesystem::path path(cli.config_path);
    cfg = parse_config(read_file(cli.config_path), path.has_parent_path() ? path.parent_path() : ".");
  } else if (info.needs_config) {
    throw ConfigError("--config is required for '" + info.name + "'");
  } else {
    cfg.base_dir = ".";
  }
  if (!cfg.subcommand.empty() && cfg.subcommand != info.name)
    throw ConfigError("$.subcommand: config is for '" + cfg.subcommand + "', invoked as '" + info.name + "'");
  cfg.subcommand = info.name;

  Flags flags;
  if (!cli.grid.empty()) flags.grid = parse_grid(cli.grid);
  if (cli.tol) {
    if (!(*cli.tol > 0.0)) throw ConfigError("--tol: must be positive");
    cfg.policy.rel_tol = *cli.tol;
    cfg.policy.density_rel_tol = *cli.tol;
  }
  if (cli.seed) cfg.seed = cli.seed;
  flags.only.insert(cli.only.begin(), cli.only.end());
  flags.strict = cli.strict;
  if (cli.threads > 0) l2inv::set_thread_count(cli.threads);
  std::string out_path = cli.out;
  if (out_path.empty() && cfg.output) out_path = (cfg.base_dir / *cfg.output).string();

  Table table;
  if (out_path.empty()) {
    table = info.run(cfg, flags, std::cerr);
    write_csv(std::cout, table, info.name, cfg.policy);
    std::cout.flush();
  } else {
    table = info.run(cfg, flags, std::cout);
    std::ofstream csv(out_path, std::ios::binary);
    if (!csv) throw ConfigError("--out: cannot write '" + out_path + "'");
    write_csv(csv, table, info.name, cfg.policy);
    std::ofstream meta(out_path + ".meta.json", std::ios::binary);
    meta << metadata(info.name, cfg, flags, cli, table).dump(2) << '\n';
  }
  return table.exit_code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"l2inv: L2-invariants of Z^d-complexes, heat-trace torsion and cusp bookkeeping"};
  app.require_subcommand(1);
  app.set_version_flag("--version", L2INV_VERSION);
  Cli cli;
  const CommandInfo *chosen = nullptr;
  for (const CommandInfo &info : commands()) {
    CLI::App *sub = app.add_subcommand(info.name, info.help);
    sub->add_option("--config", cli.config_path, "JSON job file")->check(CLI::ExistingFile);
    sub->add_option("--out", cli.out, "CSV path; metadata goes to <out>.meta.json");
    sub->add_option("--grid", cli.grid, "a:b:n evaluation grid");
    sub->add_option("--tol", cli.tol, "relative tolerance override");
    sub->add_option("--seed", cli.seed, "seed for randomized suites");
    sub->add_option("--threads", cli.threads, "worker threads (default: L2INV_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    if (info.name == "verify") {
      sub->add_option("--only", cli.only, "comma-separated criteria")->delimiter(',')->check(CLI::Range(1, 12));
      sub->add_flag("--strict", cli.strict, "fail on criteria known to be unattainable");
    }
    sub->callback([&chosen, &info] { chosen = &info; });
  }
  if (argc > 1 && argv[1][0] != '-') {
    const std::string name = argv[1];
    bool known = false;
    for (const CommandInfo &info : commands()) known = known || info.name == name;
    if (!known) {
      std::cerr << "UnknownSubcommand: '" << name << "'; run with --help for the list\n";
      return kExitConfig;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "ConfigParseError: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!chosen) return kExitConfig;
  try {
    return run(*chosen, cli);
  } catch (const ConfigError &e) {
    std::cerr << "ConfigParseError: " << e.what() << '\n';
    return kExitConfig;
  } catch (const l2inv::Error &e) {
    std::cerr << "ComputeError: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::exception &e) {
    std::cerr << "ComputeError: Internal: " << e.what() << '\n';
    return kExitCompute;
  }
}
