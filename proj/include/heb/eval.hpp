#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "heb/ast.hpp"
#include "heb/value.hpp"

namespace heb {

// Codes: type-mismatch, empty-sequence, division-by-zero, index-range,
// unknown-identifier, unknown-builtin, arity-mismatch, not-finite.
struct EvalError : std::runtime_error {
  std::string code;
  EvalError(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

class Scope {
 public:
  virtual ~Scope() = default;
  virtual const Value* lookup(const std::string& name) const = 0;
};

// A timestamped assignment of values to (resolved) identifiers.
struct Valuation : Scope {
  std::unordered_map<std::string, Value> values;
  double time = 0.0;

  const Value* lookup(const std::string& name) const override {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
  }
  void set(const std::string& name, Value v) { values[name] = std::move(v); }
};

// Overlays a small set of bindings (ANY parameters, bound variables) on a
// base scope.
class OverlayScope : public Scope {
 public:
  explicit OverlayScope(const Scope* base) : base_(base) {}
  void bind(const std::string& name, Value v) { vars_[name] = std::move(v); }
  const Value* lookup(const std::string& name) const override {
    auto it = vars_.find(name);
    if (it != vars_.end()) return &it->second;
    return base_ ? base_->lookup(name) : nullptr;
  }

 private:
  const Scope* base_;
  std::map<std::string, Value> vars_;
};

struct EvalOptions {
  // Absolute tolerance for `=`/`≠` on numbers; zero means exact.
  double realEqTol = 0.0;
  // Consulted for numeric `=` atoms before the built-in comparison; returning
  // a value overrides the result.  Used by the crossing detector.
  std::function<std::optional<bool>(const Expr& atom, double lhs, double rhs)> eqHook;
};

Value eval(const Expr& e, const Scope& scope, const EvalOptions& opt = {});
Value eval(const ExprPtr& e, const Scope& scope, const EvalOptions& opt = {});

// Evaluates with ANY-parameter bindings layered over the valuation.
Value eval(const Expr& e, const Valuation& v, const std::map<std::string, Value>& params,
           const EvalOptions& opt = {});

// Predicate evaluation with the time variable bound to `t`.
bool eval_guard(const Expr& g, const Valuation& v, double t, const std::string& timeVar = "t",
                const EvalOptions& opt = {});

bool eval_bool(const Expr& e, const Scope& scope, const EvalOptions& opt = {});

// Non-throwing variant; on failure returns nullopt and fills `err`.
std::optional<Value> try_eval(const Expr& e, const Scope& scope, const EvalOptions& opt,
                              EvalError* err = nullptr);

// Membership of `v` in the (possibly infinite) set denoted by `setExpr`.
bool member_of(const Value& v, const Expr& setExpr, const Scope& scope, const EvalOptions& opt = {});

// Built-in functions.  Throws EvalError(unknown-builtin / arity-mismatch).
Value call_builtin(const std::string& name, const std::vector<Value>& args);

struct BuiltinInfo {
  std::string name;
  int minArity = 0;
  int maxArity = 0;
  std::function<Value(const std::vector<Value>&)> fn;  // empty for type constructors
};

const BuiltinInfo* find_builtin(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace heb
