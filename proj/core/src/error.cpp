#include "l2inv/error.hpp"

namespace l2inv {

Error::Error(std::string kind, const std::string &message)
    : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

QuadratureNotConverged::QuadratureNotConverged(const std::string &message, double estimate,
                                               double gap)
    : Error("QuadratureNotConverged", message + " (estimate " + std::to_string(estimate) +
                                          ", gap " + std::to_string(gap) + ")"),
      estimate_(estimate), gap_(gap) {}

void fail(const std::string &kind, const std::string &message) { throw Error(kind, message); }

} // namespace l2inv
