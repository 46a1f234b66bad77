#ifndef PACKCOUNT_ERRORS_HPP
#define PACKCOUNT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace packcount {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input document / instance.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a shape or argument contract (wrong n, wrong q, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The instance is outside the parameter regime an operation needs.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Greedy construction of a valid packing got stuck.
class ConstructionFailed : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

/// An exact computation would exceed its configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Sampling was requested from a graph without perfect matchings.
class NoPerfectMatching : public Error {
 public:
  using Error::Error;
};

/// A coupling construction has an empty side.
class DegenerateCoupling : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace packcount

#endif  // PACKCOUNT_ERRORS_HPP
