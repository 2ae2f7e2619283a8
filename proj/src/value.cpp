#include "heb/value.hpp"

#include <algorithm>
#include <cstdio>

namespace heb {

namespace {
const std::vector<Value>& empty_items() {
  static const std::vector<Value> none;
  return none;
}

int rank(ValueKind k) {
  switch (k) {
    case ValueKind::Real: case ValueKind::Int: return 0;
    case ValueKind::Bool: return 1;
    case ValueKind::Enum: return 2;
    case ValueKind::Tuple: return 3;
    case ValueKind::Set: return 4;
    case ValueKind::Seq: return 5;
  }
  return 6;
}

std::string number_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}
}  // namespace

Value Value::real(double x) {
  Value v;
  v.kind_ = ValueKind::Real;
  v.r_ = x;
  return v;
}

Value Value::integer(std::int64_t x) {
  Value v;
  v.kind_ = ValueKind::Int;
  v.i_ = x;
  return v;
}

Value Value::boolean(bool b) {
  Value v;
  v.kind_ = ValueKind::Bool;
  v.b_ = b;
  return v;
}

Value Value::enum_lit(std::string set, std::string lit) {
  Value v;
  v.kind_ = ValueKind::Enum;
  v.text_ = std::make_shared<const std::string>(std::move(set));
  v.lit_ = std::make_shared<const std::string>(std::move(lit));
  return v;
}

Value Value::tuple(std::vector<Value> items) {
  Value v;
  v.kind_ = ValueKind::Tuple;
  v.items_ = std::make_shared<const std::vector<Value>>(std::move(items));
  return v;
}

Value Value::set(std::vector<Value> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  Value v;
  v.kind_ = ValueKind::Set;
  v.items_ = std::make_shared<const std::vector<Value>>(std::move(items));
  return v;
}

Value Value::seq(std::vector<Value> items) {
  Value v;
  v.kind_ = ValueKind::Seq;
  v.items_ = std::make_shared<const std::vector<Value>>(std::move(items));
  return v;
}

const std::vector<Value>& Value::items() const { return items_ ? *items_ : empty_items(); }

std::vector<Value> Value::flatten() const {
  if (kind_ != ValueKind::Tuple) return {*this};
  std::vector<Value> out;
  const auto& xs = items();
  if (!xs.empty()) out = xs[0].flatten();
  for (std::size_t k = 1; k < xs.size(); ++k) out.push_back(xs[k]);
  return out;
}

bool Value::contains(const Value& v) const {
  const auto& xs = items();
  return std::binary_search(xs.begin(), xs.end(), v);
}

int compare(const Value& a, const Value& b) {
  const int ra = rank(a.kind());
  const int rb = rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case ValueKind::Real:
    case ValueKind::Int: {
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int)
        return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
      const double x = a.as_real();
      const double y = b.as_real();
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case ValueKind::Bool:
      return a.as_bool() == b.as_bool() ? 0 : (a.as_bool() ? 1 : -1);
    case ValueKind::Enum: {
      if (int c = a.enum_set().compare(b.enum_set())) return c < 0 ? -1 : 1;
      int c = a.enum_literal().compare(b.enum_literal());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    default: {
      const auto& xs = a.items();
      const auto& ys = b.items();
      const std::size_t n = std::min(xs.size(), ys.size());
      for (std::size_t k = 0; k < n; ++k)
        if (int c = compare(xs[k], ys[k])) return c;
      return xs.size() < ys.size() ? -1 : (xs.size() > ys.size() ? 1 : 0);
    }
  }
}

std::string to_string(const Value& v) {
  auto join = [](const std::vector<Value>& xs, const char* sep) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (k) out += sep;
      out += to_string(xs[k]);
    }
    return out;
  };
  switch (v.kind()) {
    case ValueKind::Real: return number_text(v.as_real());
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Bool: return v.as_bool() ? "TRUE" : "FALSE";
    case ValueKind::Enum: return v.enum_literal();
    case ValueKind::Tuple: return "(" + join(v.flatten(), " ↦ ") + ")";
    case ValueKind::Set: return v.items().empty() ? "∅" : "{" + join(v.items(), ", ") + "}";
    case ValueKind::Seq: return "⟨" + join(v.items(), ", ") + "⟩";
  }
  return "?";
}

const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Real: return "real";
    case ValueKind::Int: return "integer";
    case ValueKind::Bool: return "boolean";
    case ValueKind::Enum: return "enumeration literal";
    case ValueKind::Tuple: return "tuple";
    case ValueKind::Set: return "set";
    case ValueKind::Seq: return "sequence";
  }
  return "?";
}

}  // namespace heb
