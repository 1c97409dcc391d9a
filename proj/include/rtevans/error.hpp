#pragma once

#include <stdexcept>
#include <string>

namespace rtevans {

/// Bad input: parameters outside their domain, malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that did not converge or could not bracket its target.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace rtevans
