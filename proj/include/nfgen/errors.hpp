#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nfgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (NaN, log of a
// negative, a ≥ b, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller violated an API contract (format mismatch, duplicate points, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Bad or incomplete configuration document (NFD, PPD, template).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Template text with a placeholder that render() cannot bind.
class TemplateError : public Error {
 public:
  using Error::Error;
};

class FittingError : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePlanError : public Error {
 public:
  using Error::Error;
};

}  // namespace nfgen
