#include "heb/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace heb {

namespace {

ScenarioLiteral literal_from(const nlohmann::json& j) {
  ScenarioLiteral l;
  if (j.is_number_integer()) {
    l.kind = ScenarioLiteral::Kind::Integer;
    l.integer = j.get<long long>();
  } else if (j.is_number()) {
    l.kind = ScenarioLiteral::Kind::Number;
    l.number = j.get<double>();
  } else if (j.is_boolean()) {
    l.kind = ScenarioLiteral::Kind::Bool;
    l.flag = j.get<bool>();
  } else if (j.is_string()) {
    l.kind = ScenarioLiteral::Kind::Text;
    l.text = j.get<std::string>();
  } else if (j.is_array()) {
    l.kind = ScenarioLiteral::Kind::List;
    for (const auto& x : j) l.items.push_back(literal_from(x));
  } else {
    throw std::runtime_error("unsupported binding value " + j.dump());
  }
  return l;
}

}  // namespace

const ScenarioEntry* ScenarioBindings::find(const std::string& machine, const std::string& event,
                                            int occurrence) const {
  // A machine-qualified entry is more specific than a plain one.
  const ScenarioEntry* plain = nullptr;
  for (const auto& e : entries) {
    if (e.occurrence != occurrence) continue;
    if (e.event == machine + "." + event) return &e;
    if (e.event == event && !plain) plain = &e;
  }
  return plain;
}

ScenarioBindings parse_scenario(const std::string& jsonText) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonText);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw std::runtime_error("scenario must be a JSON array");
  ScenarioBindings out;
  int pos = 0;
  for (const auto& x : j) {
    if (!x.is_object() || !x.contains("event") || !x["event"].is_string())
      throw std::runtime_error("scenario entry " + std::to_string(pos) + " needs an \"event\" string");
    ScenarioEntry e;
    e.event = x["event"].get<std::string>();
    if (x.contains("occurrence")) {
      if (!x["occurrence"].is_number_integer() || x["occurrence"].get<int>() < 1)
        throw std::runtime_error("scenario entry " + std::to_string(pos) + ": occurrence must be an integer >= 1");
      e.occurrence = x["occurrence"].get<int>();
    }
    if (x.contains("bindings")) {
      if (!x["bindings"].is_object())
        throw std::runtime_error("scenario entry " + std::to_string(pos) + ": bindings must be an object");
      for (const auto& [k, v] : x["bindings"].items()) e.bindings[k] = literal_from(v);
    }
    e.position = pos++;
    for (const auto& prev : out.entries)
      if (prev.event == e.event && prev.occurrence == e.occurrence)
        throw std::runtime_error("duplicate scenario entry for " + e.event + " occurrence " +
                                 std::to_string(e.occurrence));
    out.entries.push_back(std::move(e));
  }
  return out;
}

ScenarioBindings load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Value resolve_literal(const ScenarioLiteral& lit, const ElaboratedProject& p) {
  switch (lit.kind) {
    case ScenarioLiteral::Kind::Number: return Value::real(lit.number);
    case ScenarioLiteral::Kind::Integer: return Value::real(static_cast<double>(lit.integer));
    case ScenarioLiteral::Kind::Bool: return Value::boolean(lit.flag);
    case ScenarioLiteral::Kind::List: {
      std::vector<Value> xs;
      for (const auto& i : lit.items) xs.push_back(resolve_literal(i, p));
      return Value::seq(std::move(xs));
    }
    case ScenarioLiteral::Kind::Text: break;
  }
  std::vector<Value> hits;
  for (const auto& c : p.contexts)
    for (const auto& [set, lits] : c.literals)
      for (const auto& l : lits)
        if (l == lit.text || set + "." + l == lit.text) hits.push_back(Value::enum_lit(set, l));
  if (hits.size() != 1)
    throw EvalError("unknown-identifier", hits.empty() ? "no enumeration literal named " + lit.text
                                                       : "ambiguous enumeration literal " + lit.text);
  return hits[0];
}

}  // namespace heb
