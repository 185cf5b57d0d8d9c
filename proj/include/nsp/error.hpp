#pragma once

#include <stdexcept>
#include <string>

namespace nsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, geometry, or vector lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A dense factorization did not converge.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// An operation needs a harmless subspace of dimension >= 1.
class EmptySubspaceError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure produced a non-finite value.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed file, unsupported format version, or an I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsp
