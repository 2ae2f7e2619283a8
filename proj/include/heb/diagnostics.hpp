#pragma once

#include <string>
#include <vector>

#include "heb/ast.hpp"

namespace heb {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string code;  // stable identifier, e.g. "missing-end"
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline Diagnostic make_error(std::string code, std::string message, SourceLoc loc = {}) {
  return {Severity::Error, std::move(loc), std::move(code), std::move(message)};
}

inline Diagnostic make_warning(std::string code, std::string message, SourceLoc loc = {}) {
  return {Severity::Warning, std::move(loc), std::move(code), std::move(message)};
}

inline Diagnostic make_error(SourceLoc loc, std::string code, std::string message) {
  return make_error(std::move(code), std::move(message), std::move(loc));
}

inline Diagnostic make_warning(SourceLoc loc, std::string code, std::string message) {
  return make_warning(std::move(code), std::move(message), std::move(loc));
}

// `path:line:col: code: message`, prefixed with "warning: " for warnings.
std::string format_diagnostic(const Diagnostic& d);

bool has_errors(const Diagnostics& ds);

// Codes of the error diagnostics, in order.
std::vector<std::string> error_codes(const Diagnostics& ds);

}  // namespace heb
