#pragma once

#include <stdexcept>
#include <string>

namespace vine {

// Base for every error the library raises. `code()` is a stable,
// machine-readable reason string used by the CLI and the session protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Precondition violated on a physical quantity (negative radius, zero span...).
class DomainError : public Error {
 public:
  DomainError(const std::string& field, const std::string& what)
      : Error("domain_error", field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Shape mismatch between a description and a configuration.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error("structural_error", what) {}
};

// Non-finite energy/gradient during a solve.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric_error", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& field, int line, const std::string& what)
      : Error("parse_error",
              (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field +
                  ": " + what),
        field_(field),
        line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

class VersionError : public Error {
 public:
  VersionError(int found, int supported)
      : Error("unsupported_version", "schema version " + std::to_string(found) +
                                         " is not supported (expected " +
                                         std::to_string(supported) + ")") {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error("calibration_error", what) {}
};

class PlanningError : public Error {
 public:
  PlanningError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

}  // namespace vine
