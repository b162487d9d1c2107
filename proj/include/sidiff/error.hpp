#pragma once

#include <stdexcept>
#include <string>

namespace sidiff {

/// Base class for every error raised by the library. The category string is
/// what the CLI prints in front of the message.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string &what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string &category() const noexcept { return category_; }

private:
  std::string category_;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  explicit DomainError(const std::string &what) : Error("domain", what) {}
};

/// Evaluation of a transition law at t == t0, where it is a point mass.
class DegenerateTimeError : public Error {
public:
  explicit DegenerateTimeError(const std::string &what)
      : Error("degenerate-time", what) {}
};

/// Invalid or inconsistent configuration (JSON, CLI flags, parameters).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string &what) : Error("config", what) {}
};

/// Malformed input data (CSV files and the like).
class DataError : public Error {
public:
  explicit DataError(const std::string &what) : Error("data", what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error("io", what) {}
};

/// A numerical procedure failed to converge or produced non-finite values.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &what) : Error("numerical", what) {}
};

} // namespace sidiff
