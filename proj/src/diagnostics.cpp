#include "heb/diagnostics.hpp"

namespace heb {

std::string format_diagnostic(const Diagnostic& d) {
  std::string out = d.loc.path.empty() ? std::string("<project>") : d.loc.path;
  out += ':' + std::to_string(d.loc.line) + ':' + std::to_string(d.loc.column) + ": ";
  if (d.severity == Severity::Warning) out += "warning: ";
  out += d.code + ": " + d.message;
  return out;
}

bool has_errors(const Diagnostics& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

std::vector<std::string> error_codes(const Diagnostics& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds)
    if (d.severity == Severity::Error) out.push_back(d.code);
  return out;
}

}  // namespace heb
