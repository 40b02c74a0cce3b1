#pragma once

#include <stdexcept>
#include <string>

namespace pudq {

enum class ErrorKind {
  usage,
  validation,
  io,
  parse,
  lookup,
  missing_parameter,
  numerical,
  structure,
  invalid_region,
  internal
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::missing_parameter: return "missing_parameter";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::structure: return "structure";
    case ErrorKind::invalid_region: return "invalid_region";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pudq
