#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace heb {

enum class ValueKind { Real, Int, Bool, Enum, Tuple, Set, Seq };

// Immutable runtime value.  Compound payloads are shared, so copies are cheap.
// Sets are kept sorted and duplicate-free under `compare`.
class Value {
 public:
  Value() = default;  // Real 0.0

  static Value real(double x);
  static Value integer(std::int64_t x);
  static Value boolean(bool b);
  static Value enum_lit(std::string set, std::string lit);
  static Value tuple(std::vector<Value> items);
  static Value pair(Value a, Value b) { return tuple({std::move(a), std::move(b)}); }
  static Value set(std::vector<Value> items);  // sorts and removes duplicates
  static Value seq(std::vector<Value> items);

  ValueKind kind() const { return kind_; }
  bool is_numeric() const { return kind_ == ValueKind::Real || kind_ == ValueKind::Int; }
  double as_real() const { return kind_ == ValueKind::Int ? static_cast<double>(i_) : r_; }
  std::int64_t as_int() const { return i_; }
  bool as_bool() const { return b_; }
  const std::string& enum_set() const { return *text_; }
  const std::string& enum_literal() const { return *lit_; }
  const std::vector<Value>& items() const;

  // Left-nested maplet tuples flattened: ((a,b),c) -> [a,b,c].
  std::vector<Value> flatten() const;
  bool contains(const Value& v) const;  // Set membership by binary search

 private:
  ValueKind kind_ = ValueKind::Real;
  double r_ = 0.0;
  std::int64_t i_ = 0;
  bool b_ = false;
  std::shared_ptr<const std::string> text_;
  std::shared_ptr<const std::string> lit_;
  std::shared_ptr<const std::vector<Value>> items_;
};

// Total order: numbers (Real and Int compared numerically) < Bool < Enum <
// Tuple < Set < Seq; compounds compare lexicographically.
int compare(const Value& a, const Value& b);
inline bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
inline bool operator!=(const Value& a, const Value& b) { return compare(a, b) != 0; }
inline bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

// Human-readable rendering in the notation's own syntax.
std::string to_string(const Value& v);

const char* kind_name(ValueKind k);

}  // namespace heb
