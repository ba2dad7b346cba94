#pragma once

#include <stdexcept>
#include <string>

namespace valfind {

// Base for every error the library raises. The CLI maps the concrete
// subclasses onto exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, labels, layouts).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a valid result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace valfind
