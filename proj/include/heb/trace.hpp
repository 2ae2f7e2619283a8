#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heb/value.hpp"

namespace heb {

enum class RecordKind { Header, ModeEvent, Sample, Violation, RunEnd };

const char* record_kind_name(RecordKind k);

struct Delta {
  std::string var;
  std::optional<Value> before;  // absent in samples
  Value after;
};

// One jsonlines record.  Every line starts with the keys
// t, kind, machine, event, deltas, microStep in that order; the remaining
// fields are appended only when meaningful for the kind.
struct TraceRecord {
  double t = 0.0;
  RecordKind kind = RecordKind::ModeEvent;
  std::vector<std::string> machines;  // one entry, or every member machine of a synch group
  std::string event;                  // event or group name; project name in the header
  std::vector<Delta> deltas;
  int microStep = 0;

  std::vector<std::string> members;       // "Machine.Event" for synch groups
  std::map<std::string, Value> bindings;  // ANY parameters
  std::map<std::string, std::string> info;  // header settings, runEnd status, violation details
};

struct Trace {
  std::vector<TraceRecord> records;
};

// Appends `r`, rejecting a record that would precede the last one in
// (t, microStep) order.  Throws std::invalid_argument.
void append(Trace& tr, TraceRecord r);

// 17 significant digits, always with a decimal point or exponent so that
// reals and integers stay distinguishable.
std::string format_real(double x);

std::string value_to_json(const Value& v);
// Inverse of value_to_json.  Throws std::runtime_error.
Value value_from_json(const std::string& text);

std::string serialize_record(const TraceRecord& r);
std::string serialize_jsonl(const Trace& t);
// Sample records only: a `t` column and one column per sampled variable.
std::string serialize_csv(const Trace& t);

// Throws std::runtime_error naming the offending line.
Trace deserialize_jsonl(const std::string& text);

// Structural checks used by `trace-validate`.  Empty when the trace is valid.
std::vector<std::string> validate_trace(const std::string& text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t x);

}  // namespace heb
