#pragma once

#include "l2inv/quadrature.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace l2inv::verify {

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  double time_limit = 0.0; ///< 0 when the criterion has no runtime bound
  std::string note;        ///< informational, not part of the CSV
  bool passed = false;
};

struct Options {
  std::uint64_t seed = 20240607;
  QuadraturePolicy policy;
  std::set<int> only; ///< empty runs 1-12
};

/// Criteria that cannot pass as stated; the acceptance runner reports them
/// as FAIL but does not treat them as regressions.
const std::set<int> &known_unattainable();

/// Runs criteria 1-12 (or the subset in options.only).
std::vector<Criterion> run_criteria(const Options &options);

/// One row per check: criterion,check,value,reference,tolerance,passed.
/// Timings are left out so equal inputs give equal bytes.
std::string to_csv(const std::vector<Criterion> &criteria);

/// Reruns the criteria with a different worker count and compares CSV bytes.
Criterion determinism_criterion(const Options &options, const std::string &first_csv, int threads);

std::string summary_line(const Criterion &c);

} // namespace l2inv::verify
