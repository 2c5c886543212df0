#ifndef VMSLOD_ERRORS_HPP
#define VMSLOD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vmslod {

/// Invalid configuration or precondition violation; the CLI maps this to
/// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear-algebra failure (singular factorization, residual out of
/// tolerance); the CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vmslod

#endif
