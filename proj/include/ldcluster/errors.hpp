#pragma once

#include <stdexcept>
#include <string>

namespace ldc {

/// A caller violated a documented precondition (bad parameter, wrong window, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a result (no bracket, no accepted mass, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldc
