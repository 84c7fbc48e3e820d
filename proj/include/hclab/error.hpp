#pragma once

#include <stdexcept>
#include <string>

namespace hclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or malformed input (bad law parameters, schema violations).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Nesting, padding, or window violations of the finite geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Linear solver failure (non-convergence, missing factorization).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hclab
