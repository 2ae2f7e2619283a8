#pragma once

#include <map>
#include <string>
#include <vector>

#include "heb/elaborate.hpp"
#include "heb/value.hpp"

namespace heb {

// A literal as written in a scenario file.  Text is resolved against the
// project's enumeration literals ("CYL" or "HAZTYPE.CYL").
struct ScenarioLiteral {
  enum class Kind { Number, Integer, Bool, Text, List } kind = Kind::Number;
  double number = 0.0;
  long long integer = 0;
  bool flag = false;
  std::string text;
  std::vector<ScenarioLiteral> items;
};

struct ScenarioEntry {
  std::string event;   // plain event name, or "Machine.Event"
  int occurrence = 1;  // 1-based count of firings of that event
  std::map<std::string, ScenarioLiteral> bindings;
  int position = 0;    // index in the file
};

struct ScenarioBindings {
  std::vector<ScenarioEntry> entries;
  // Prefers a "Machine.Event" entry over a plain "Event" one.
  const ScenarioEntry* find(const std::string& machine, const std::string& event, int occurrence) const;
};

// Throws std::runtime_error on malformed input.
ScenarioBindings parse_scenario(const std::string& jsonText);
ScenarioBindings load_scenario(const std::string& path);

// Throws EvalError(unknown-identifier) for text naming no literal.
Value resolve_literal(const ScenarioLiteral& lit, const ElaboratedProject& p);

}  // namespace heb
