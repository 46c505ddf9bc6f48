#pragma once

#include <stdexcept>
#include <string>

namespace netsmith {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed arguments, documents or specs. CLI exit code 2.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed document; the message carries the location.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An operation that needs a strongly connected topology got one without.
class DisconnectedError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The synthesis spec admits no feasible topology.
class InfeasibleSpec : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Instance exceeds what an exact method is allowed to attempt. CLI exit code 3.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// External solver invocation or its output failed. CLI exit code 4.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace netsmith
