#include "l2inv/parallel.hpp"
#include "l2inv/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  l2inv::verify::Options opt;
  int threads = l2inv::thread_count();
  bool strict = false;
  std::string csv_path;
  std::vector<int> only;
  app.add_option("--seed", opt.seed, "seed for the randomized criteria");
  app.add_option("--threads", threads, "worker threads for the first pass")->check(CLI::PositiveNumber);
  app.add_option("--csv", csv_path, "write the check table here");
  app.add_option("--only", only, "run only these criteria")->delimiter(',')->check(CLI::Range(1, 12));
  app.add_flag("--strict", strict, "exit non-zero on any failed criterion");
  CLI11_PARSE(app, argc, argv);

  opt.only.insert(only.begin(), only.end());
  l2inv::set_thread_count(threads);
  std::vector<l2inv::verify::Criterion> results = l2inv::verify::run_criteria(opt);
  for (const auto &c : results) std::cout << l2inv::verify::summary_line(c) << std::endl;
  const std::string csv = l2inv::verify::to_csv(results);
  const auto det = l2inv::verify::determinism_criterion(opt, csv, threads == 1 ? 2 : 1);
  std::cout << l2inv::verify::summary_line(det) << std::endl;
  results.push_back(det);

  if (!csv_path.empty()) std::ofstream(csv_path, std::ios::binary) << csv;

  int unexpected = 0;
  for (const auto &c : results)
    if (!c.passed && (strict || !l2inv::verify::known_unattainable().count(c.id))) ++unexpected;
  for (int id : l2inv::verify::known_unattainable())
    std::cout << "note: criterion " << id << " is known to be unattainable as stated" << std::endl;
  return unexpected == 0 ? 0 : 1;
}
