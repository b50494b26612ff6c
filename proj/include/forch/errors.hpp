#ifndef FORCH_ERRORS_HPP
#define FORCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace forch {

/// Invalid user-supplied parameter (bad grid, bad exponent list, ...).
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A stated exponent/admissibility condition fails; the message names the
/// failing inequality.
class precondition_error : public std::domain_error {
public:
    explicit precondition_error(const std::string& what) : std::domain_error(what) {}
};

/// Missing fitted/configured constants required by a formula.
class configuration_error : public std::runtime_error {
public:
    explicit configuration_error(const std::string& what) : std::runtime_error(what) {}
};

/// Nonlinear or time-stepping failure (carries diagnostics in the message).
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// Requested truncation cannot be certified below the tolerance.
class truncation_error : public std::runtime_error {
public:
    explicit truncation_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace forch

#endif
