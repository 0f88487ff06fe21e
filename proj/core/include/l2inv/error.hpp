#pragma once

#include <stdexcept>
#include <string>

namespace l2inv {

/// Base class for every failure raised by the library. `kind()` is the
/// stable error name (e.g. "ShapeMismatch") that the CLI reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string &message);

  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// Adaptive quadrature ran out of refinement budget. Carries the best
/// estimate reached and the last observed gap between refinement levels.
class QuadratureNotConverged : public Error {
public:
  QuadratureNotConverged(const std::string &message, double estimate, double gap);

  double estimate() const noexcept { return estimate_; }
  double gap() const noexcept { return gap_; }

private:
  double estimate_;
  double gap_;
};

[[noreturn]] void fail(const std::string &kind, const std::string &message);

} // namespace l2inv
