#pragma once

#include <stdexcept>
#include <string>

namespace effdim {

/// Input vector or matrix has the wrong dimension.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A construction parameter is out of its admissible range.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A closed-form bound or estimate is undefined for the given arguments.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed at run time (divergence, budget refusal).
class RuntimeFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace effdim
