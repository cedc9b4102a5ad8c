#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace crnsn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Structural violation of the network data model (duplicate names, negative
/// coefficients, dangling species).
class InvalidNetwork : public Error {
 public:
  using Error::Error;
};

/// S r = 0 has no strictly positive solution.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class EnumerationCapExceeded : public Error {
 public:
  explicit EnumerationCapExceeded(std::size_t cap)
      : Error("enumeration cap of " + std::to_string(cap) + " selections exceeded"), cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

/// Every Child Selection has zero coefficient, so det G vanishes identically.
class PermanentlySingular : public Error {
 public:
  using Error::Error;
};

class MissingSymbol : public Error {
 public:
  using Error::Error;
};

/// The coefficient of the solved-for derivative symbol evaluates to zero.
class DegenerateSlope : public Error {
 public:
  using Error::Error;
};

class NonpositiveRoot : public Error {
 public:
  using Error::Error;
};

class ScheduleExhausted : public Error {
 public:
  ScheduleExhausted(const std::string& message, std::vector<std::string> attempts)
      : Error(message), attempts_(std::move(attempts)) {}
  const std::vector<std::string>& attempts() const { return attempts_; }

 private:
  std::vector<std::string> attempts_;
};

class DistanceNotOne : public Error {
 public:
  using Error::Error;
};

class NudgeExhausted : public Error {
 public:
  using Error::Error;
};

class EmbeddingMismatch : public Error {
 public:
  using Error::Error;
};

/// A kinetics parameter came out nonpositive or irrational.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

}  // namespace crnsn
