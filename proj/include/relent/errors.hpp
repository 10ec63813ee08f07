#ifndef RELENT_ERRORS_HPP
#define RELENT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace relent {

/// Evaluation outside the admissible state region (vacuum, bad parameters).
class DomainError : public std::domain_error {
  public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A time stepper gave up: CFL violation, loss of positivity, Newton failure.
class SolverAbort : public std::runtime_error {
  public:
    explicit SolverAbort(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relent

#endif  // RELENT_ERRORS_HPP
