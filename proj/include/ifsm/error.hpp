#pragma once

#include <stdexcept>
#include <string>

namespace ifsm {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Invalid input value: zero mass, empty support, parameter out of range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The model is malformed or violates its own invariants (e.g. a map escapes
// the declared bounding box).
class ModelError : public Error {
 public:
  using Error::Error;
};

// A configured size cap would be exceeded (transport graph, tuple count).
class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ifsm
