#pragma once

#include <stdexcept>
#include <string>

namespace lindblad {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed model files, inconsistent dimensions, parameters
/// outside their domain. A caller can usually fix these.
struct ValidationError : Error {
  using Error::Error;
};

/// Numerical failure discovered at runtime: an integrator that will not
/// converge, an overflowing matrix exponential, a certificate that fails.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace lindblad
