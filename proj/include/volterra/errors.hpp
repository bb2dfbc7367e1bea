#pragma once

#include <stdexcept>
#include <string>

namespace volterra {

/// Broad failure classes. The CLI maps each to its own exit code.
enum class ErrorKind {
  config,     ///< malformed input parameters or configuration
  numerical,  ///< existence/solvability loss, non-convergence, domain violation
  io,         ///< file system and CSV parsing problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// A continuous real solution ceases to exist at `at` (time or node time).
class ExistenceError : public NumericalError {
 public:
  ExistenceError(const std::string& what, double at) : NumericalError(what), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace volterra
