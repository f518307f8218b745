#pragma once

#include <stdexcept>
#include <string>

namespace capnet {

/// Base for every error raised by the library. The CLI maps subclasses to
/// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed identifiers, fixture rows or dataset cells.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range parameters or generator settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A requested computation needs data that is absent (e.g. an unassessed
/// capability in a profile).
class MissingDataError : public Error {
 public:
  using Error::Error;
};

/// Cycle detected where a DAG is required.
class CycleError : public Error {
 public:
  using Error::Error;
};

/// The cover problem has no selection meeting the visit bounds.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A library invariant was found broken at run time.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace capnet
