#pragma once

#include <stdexcept>
#include <string>

namespace mdpboot {

/// Malformed arguments or violated preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested set or event admits no feasible point. Rates for such
/// problems are reported as +inf wherever the API returns a value instead.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measure charges an atom that the reference measure does not, so the
/// density dG/dP does not exist.
class AbsoluteContinuityError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// Enumeration or active-set budget exceeded.
class ComplexityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant; never expected when preconditions hold.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mdpboot
