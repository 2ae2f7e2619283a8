#include "heb/trace.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace heb {

using ojson = nlohmann::ordered_json;

const char* record_kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::Header: return "header";
    case RecordKind::ModeEvent: return "modeEvent";
    case RecordKind::Sample: return "sample";
    case RecordKind::Violation: return "violation";
    case RecordKind::RunEnd: return "runEnd";
  }
  return "?";
}

namespace {

std::optional<RecordKind> kind_from(const std::string& s) {
  for (auto k : {RecordKind::Header, RecordKind::ModeEvent, RecordKind::Sample, RecordKind::Violation,
                 RecordKind::RunEnd})
    if (s == record_kind_name(k)) return k;
  return std::nullopt;
}

std::string quote(const std::string& s) { return ojson(s).dump(); }

Value value_from(const ojson& j) {
  switch (j.type()) {
    case ojson::value_t::number_float: return Value::real(j.get<double>());
    case ojson::value_t::number_integer:
    case ojson::value_t::number_unsigned: return Value::integer(j.get<std::int64_t>());
    case ojson::value_t::boolean: return Value::boolean(j.get<bool>());
    case ojson::value_t::string: {
      const auto s = j.get<std::string>();
      const auto dot = s.find('.');
      if (dot == std::string::npos) throw std::runtime_error("enumeration value without set: " + s);
      return Value::enum_lit(s.substr(0, dot), s.substr(dot + 1));
    }
    case ojson::value_t::array: {
      std::vector<Value> xs;
      for (const auto& e : j) xs.push_back(value_from(e));
      return Value::seq(std::move(xs));
    }
    case ojson::value_t::object: {
      std::vector<Value> xs;
      if (j.contains("tuple")) {
        for (const auto& e : j.at("tuple")) xs.push_back(value_from(e));
        return Value::tuple(std::move(xs));
      }
      if (j.contains("set")) {
        for (const auto& e : j.at("set")) xs.push_back(value_from(e));
        return Value::set(std::move(xs));
      }
      break;
    }
    default: break;
  }
  throw std::runtime_error("unrecognised value encoding: " + j.dump());
}

std::string join_values(const std::vector<Value>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += value_to_json(xs[i]);
  }
  return out;
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

Value value_from_json(const std::string& text) { return value_from(ojson::parse(text)); }

std::string value_to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Real: return format_real(v.as_real());
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Bool: return v.as_bool() ? "true" : "false";
    case ValueKind::Enum: return quote(v.enum_set() + "." + v.enum_literal());
    case ValueKind::Tuple: return "{\"tuple\":[" + join_values(v.items()) + "]}";
    case ValueKind::Set: return "{\"set\":[" + join_values(v.items()) + "]}";
    case ValueKind::Seq: return "[" + join_values(v.items()) + "]";
  }
  return "null";
}

std::string serialize_record(const TraceRecord& r) {
  std::string s = "{\"t\":" + format_real(r.t) + ",\"kind\":" + quote(record_kind_name(r.kind)) + ",\"machine\":";
  if (r.machines.size() == 1) {
    s += quote(r.machines[0]);
  } else if (r.machines.empty()) {
    s += "\"\"";
  } else {
    s += '[';
    for (std::size_t i = 0; i < r.machines.size(); ++i) s += (i ? "," : "") + quote(r.machines[i]);
    s += ']';
  }
  s += ",\"event\":" + quote(r.event) + ",\"deltas\":[";
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    const auto& d = r.deltas[i];
    if (i) s += ',';
    s += "{\"var\":" + quote(d.var);
    if (d.before) s += ",\"before\":" + value_to_json(*d.before);
    s += ",\"after\":" + value_to_json(d.after) + "}";
  }
  s += "],\"microStep\":" + std::to_string(r.microStep);
  if (!r.members.empty()) {
    s += ",\"members\":[";
    for (std::size_t i = 0; i < r.members.size(); ++i) s += (i ? "," : "") + quote(r.members[i]);
    s += ']';
  }
  if (!r.bindings.empty()) {
    s += ",\"bindings\":{";
    bool first = true;
    for (const auto& [k, v] : r.bindings) {
      s += (first ? "" : ",") + quote(k) + ":" + value_to_json(v);
      first = false;
    }
    s += '}';
  }
  for (const auto& [k, v] : r.info) s += "," + quote(k) + ":" + quote(v);
  s += '}';
  return s;
}

void append(Trace& tr, TraceRecord r) {
  if (!tr.records.empty()) {
    const auto& last = tr.records.back();
    if (r.t < last.t || (r.t == last.t && r.kind == RecordKind::ModeEvent && last.kind == RecordKind::ModeEvent &&
                         r.microStep < last.microStep))
      throw std::invalid_argument("trace record at t=" + format_real(r.t) + " precedes the last record at t=" +
                                  format_real(last.t));
  }
  tr.records.push_back(std::move(r));
}

std::string serialize_jsonl(const Trace& t) {
  std::string out;
  for (const auto& r : t.records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::string serialize_csv(const Trace& t) {
  std::vector<std::string> columns;
  std::set<std::string> seen;
  for (const auto& r : t.records)
    if (r.kind == RecordKind::Sample)
      for (const auto& d : r.deltas)
        if (seen.insert(d.var).second) columns.push_back(d.var);
  std::ostringstream os;
  os << "t";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (const auto& r : t.records) {
    if (r.kind != RecordKind::Sample) continue;
    std::map<std::string, const Value*> row;
    for (const auto& d : r.deltas) row[d.var] = &d.after;
    os << format_real(r.t);
    for (const auto& c : columns) {
      os << ',';
      auto it = row.find(c);
      if (it == row.end()) continue;
      if (it->second->is_numeric()) os << format_real(it->second->as_real());
      else os << quote(to_string(*it->second));
    }
    os << '\n';
  }
  return os.str();
}

Trace deserialize_jsonl(const std::string& text) {
  Trace out;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      const ojson j = ojson::parse(line);
      TraceRecord r;
      r.t = j.at("t").get<double>();
      auto k = kind_from(j.at("kind").get<std::string>());
      if (!k) throw std::runtime_error("unknown kind");
      r.kind = *k;
      const auto& m = j.at("machine");
      if (m.is_array()) {
        for (const auto& x : m) r.machines.push_back(x.get<std::string>());
      } else if (!m.get<std::string>().empty()) {
        r.machines.push_back(m.get<std::string>());
      }
      r.event = j.at("event").get<std::string>();
      for (const auto& d : j.at("deltas")) {
        Delta x;
        x.var = d.at("var").get<std::string>();
        if (d.contains("before")) x.before = value_from(d.at("before"));
        x.after = value_from(d.at("after"));
        r.deltas.push_back(std::move(x));
      }
      r.microStep = j.at("microStep").get<int>();
      for (const auto& [key, val] : j.items()) {
        if (key == "t" || key == "kind" || key == "machine" || key == "event" || key == "deltas" ||
            key == "microStep")
          continue;
        if (key == "members") {
          for (const auto& x : val) r.members.push_back(x.get<std::string>());
        } else if (key == "bindings") {
          for (const auto& [bk, bv] : val.items()) r.bindings[bk] = value_from(bv);
        } else {
          r.info[key] = val.get<std::string>();
        }
      }
      out.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> validate_trace(const std::string& text) {
  std::vector<std::string> problems;
  static const char* order[] = {"t", "kind", "machine", "event", "deltas", "microStep"};
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  double lastT = -std::numeric_limits<double>::infinity();
  std::map<std::string, std::pair<double, int>> lastPerMachine;
  bool sawEnd = false;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string at = "line " + std::to_string(lineNo) + ": ";
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const std::exception& e) {
      problems.push_back(at + "not JSON (" + e.what() + ")");
      continue;
    }
    if (!j.is_object() || j.size() < 6) {
      problems.push_back(at + "expected an object with at least six keys");
      continue;
    }
    int i = 0;
    for (const auto& [key, _] : j.items()) {
      if (i == 6) break;
      if (key != order[i]) problems.push_back(at + "key " + std::to_string(i) + " is " + key + ", expected " + order[i]);
      ++i;
    }
    if (!j["t"].is_number()) {
      problems.push_back(at + "t is not a number");
      continue;
    }
    const double t = j["t"].get<double>();
    const auto kind = j["kind"].is_string() ? kind_from(j["kind"].get<std::string>()) : std::nullopt;
    if (!kind) {
      problems.push_back(at + "unknown kind");
      continue;
    }
    if ((lineNo == 1) != (*kind == RecordKind::Header)) problems.push_back(at + "header must be the first line only");
    if (sawEnd) problems.push_back(at + "record after runEnd");
    if (*kind == RecordKind::RunEnd) sawEnd = true;
    if (t < lastT) problems.push_back(at + "time decreases");
    lastT = std::max(lastT, t);
    if (!j["deltas"].is_array()) problems.push_back(at + "deltas is not an array");
    if (!j["microStep"].is_number_integer() || j["microStep"].get<int>() < 0)
      problems.push_back(at + "microStep is not a non-negative integer");
    if (*kind == RecordKind::ModeEvent && j["microStep"].is_number_integer()) {
      const int ms = j["microStep"].get<int>();
      std::vector<std::string> ms_machines;
      if (j["machine"].is_array())
        for (const auto& x : j["machine"]) ms_machines.push_back(x.get<std::string>());
      else if (j["machine"].is_string())
        ms_machines.push_back(j["machine"].get<std::string>());
      for (const auto& m : ms_machines) {
        auto it = lastPerMachine.find(m);
        if (it != lastPerMachine.end() && std::make_pair(t, ms) <= it->second)
          problems.push_back(at + "occurrences of " + m + " are not strictly ordered");
        lastPerMachine[m] = {t, ms};
      }
    }
    try {
      for (const auto& d : j["deltas"]) value_from(d.at("after"));
    } catch (const std::exception& e) {
      problems.push_back(at + e.what());
    }
  }
  if (lineNo == 0) problems.push_back("empty trace");
  else if (!sawEnd) problems.push_back("missing runEnd record");
  return problems;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace heb
