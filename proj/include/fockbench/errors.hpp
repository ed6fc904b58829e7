#pragma once

#include <stdexcept>
#include <string>

namespace fockbench {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind {
  parse = 2,
  numeric = 3,
  truncation = 4,
  consistency = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid physical parameters or an evaluation outside a model's domain.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error(ErrorKind::numeric, message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& message);
  ParseError(const std::string& message) : Error(ErrorKind::parse, message), line_(0) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error(ErrorKind::numeric, message) {}
};

class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& message) : Error(ErrorKind::truncation, message) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& message) : Error(ErrorKind::consistency, message) {}
};

const char* error_kind_name(ErrorKind kind) noexcept;

}  // namespace fockbench
