#include "fockbench/errors.hpp"

namespace fockbench {

Error::Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

static std::string located(const std::string& file, int line, const std::string& message) {
  std::string out = file.empty() ? std::string("<input>") : file;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + message;
}

ParseError::ParseError(const std::string& file, int line, const std::string& message)
    : Error(ErrorKind::parse, located(file, line, message)), line_(line) {}

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::truncation: return "truncation error";
    case ErrorKind::consistency: return "internal consistency error";
  }
  return "error";
}

}  // namespace fockbench
