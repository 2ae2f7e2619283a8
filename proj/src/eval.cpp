#include "heb/eval.hpp"

#include <cmath>

namespace heb {

namespace {

class Evaluator {
 public:
  Evaluator(const Scope& scope, const EvalOptions& opt) : scope_(&scope), opt_(opt) {}

  bool ev(const Expr& e, Value& out);
  bool ev_bool(const Expr& e, bool& out);
  bool member(const Value& v, const Expr& setExpr, bool& out);

  EvalError error() const { return EvalError(code_, message_); }

 private:
  const Scope* scope_;
  const EvalOptions& opt_;
  std::string code_;
  std::string message_;

  bool fail(const char* code, std::string msg) {
    code_ = code;
    message_ = std::move(msg);
    return false;
  }
  bool mismatch(const std::string& what, const Value& v) {
    return fail("type-mismatch", what + " applied to " + kind_name(v.kind()) + " " + to_string(v));
  }
  bool numeric(const Value& v, double& x, const char* what) {
    if (!v.is_numeric()) return mismatch(what, v);
    x = v.as_real();
    return true;
  }
  bool index_of(const Value& idx, std::size_t size, std::size_t& k) {
    double x = 0.0;
    if (!numeric(idx, x, "index")) return false;
    if (x != std::floor(x) || x < 1 || x > static_cast<double>(size))
      return fail("index-range", "index " + to_string(idx) + " outside 1.." + std::to_string(size));
    k = static_cast<std::size_t>(x) - 1;
    return true;
  }

  bool ev_logic(const Expr& e, Value& out);
  bool ev_compare(const Expr& e, Value& out);
  bool ev_arith(const Expr& e, Value& out);
  bool ev_call(const Expr& e, Value& out);
  bool ev_qunion(const Expr& e, Value& out);
  bool qunion_domain(const Expr& q, std::vector<Value>& dom);
};

bool Evaluator::ev_bool(const Expr& e, bool& out) {
  Value v;
  if (!ev(e, v)) return false;
  if (v.kind() != ValueKind::Bool) return mismatch("predicate position", v);
  out = v.as_bool();
  return true;
}

bool Evaluator::ev(const Expr& e, Value& out) {
  switch (e.kind) {
    case ExprKind::Number:
      out = Value::real(e.number.to_double());
      return true;
    case ExprKind::BoolLit:
      out = Value::boolean(e.boolValue);
      return true;
    case ExprKind::Ident: {
      const Value* v = scope_->lookup(e.text);
      if (!v) return fail("unknown-identifier", "unknown identifier " + e.text);
      out = *v;
      return true;
    }
    case ExprKind::TypeName:
      if (e.text == "BOOL") {
        out = Value::set({Value::boolean(false), Value::boolean(true)});
        return true;
      }
      return fail("not-finite", "type " + pretty_print(e) + " is not a finite set");
    case ExprKind::EmptySet:
      out = Value::set({});
      return true;
    case ExprKind::Unary: {
      if (e.unop == UnOp::Not) {
        bool b;
        if (!ev_bool(*e.args[0], b)) return false;
        out = Value::boolean(!b);
        return true;
      }
      Value a;
      if (!ev(*e.args[0], a)) return false;
      if (a.kind() == ValueKind::Int) out = Value::integer(-a.as_int());
      else if (a.kind() == ValueKind::Real) out = Value::real(-a.as_real());
      else return mismatch("negation", a);
      return true;
    }
    case ExprKind::Binary:
      switch (e.binop) {
        case BinOp::Implies: case BinOp::Or: case BinOp::And:
          return ev_logic(e, out);
        case BinOp::Eq: case BinOp::Neq: case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
        case BinOp::Ge: case BinOp::In: case BinOp::NotIn: case BinOp::Colon: case BinOp::Subset:
          return ev_compare(e, out);
        case BinOp::Maplet: {
          Value a, b;
          if (!ev(*e.args[0], a) || !ev(*e.args[1], b)) return false;
          out = Value::pair(std::move(a), std::move(b));
          return true;
        }
        default:
          return ev_arith(e, out);
      }
    case ExprKind::SetExt: {
      std::vector<Value> items(e.args.size());
      for (std::size_t k = 0; k < e.args.size(); ++k)
        if (!ev(*e.args[k], items[k])) return false;
      out = Value::set(std::move(items));
      return true;
    }
    case ExprKind::SeqExt: {
      std::vector<Value> items(e.args.size());
      for (std::size_t k = 0; k < e.args.size(); ++k)
        if (!ev(*e.args[k], items[k])) return false;
      out = Value::seq(std::move(items));
      return true;
    }
    case ExprKind::Call:
      return ev_call(e, out);
    case ExprKind::Index: {
      Value base, idx;
      if (!ev(*e.args[0], base) || !ev(*e.args[1], idx)) return false;
      std::size_t k;
      if (base.kind() == ValueKind::Seq) {
        if (!index_of(idx, base.items().size(), k)) return false;
        out = base.items()[k];
        return true;
      }
      if (base.kind() == ValueKind::Tuple) {
        auto flat = base.flatten();
        if (!index_of(idx, flat.size(), k)) return false;
        out = flat[k];
        return true;
      }
      return mismatch("indexing", base);
    }
    case ExprKind::Interval: {
      Value lo, hi;
      double a, b;
      if (!ev(*e.args[0], lo) || !ev(*e.args[1], hi)) return false;
      if (!numeric(lo, a, "interval bound") || !numeric(hi, b, "interval bound")) return false;
      if (a != std::floor(a) || b != std::floor(b))
        return fail("not-finite", "real interval " + pretty_print(e) + " is not a finite set");
      std::vector<Value> items;
      for (double x = a; x <= b; x += 1) items.push_back(Value::integer(static_cast<std::int64_t>(x)));
      out = Value::set(std::move(items));
      return true;
    }
    case ExprKind::QUnion:
      return ev_qunion(e, out);
  }
  return fail("type-mismatch", "unsupported expression");
}

bool Evaluator::ev_logic(const Expr& e, Value& out) {
  bool a = false, b = false;
  const bool okA = ev_bool(*e.args[0], a);
  if (e.binop == BinOp::And) {
    if (okA && !a) { out = Value::boolean(false); return true; }
    std::string code = code_, msg = message_;
    const bool okB = ev_bool(*e.args[1], b);
    if (okB && !b) { out = Value::boolean(false); return true; }
    if (!okA) return fail(code.c_str(), msg);
    if (!okB) return false;
    out = Value::boolean(true);
    return true;
  }
  if (e.binop == BinOp::Or) {
    if (okA && a) { out = Value::boolean(true); return true; }
    std::string code = code_, msg = message_;
    const bool okB = ev_bool(*e.args[1], b);
    if (okB && b) { out = Value::boolean(true); return true; }
    if (!okA) return fail(code.c_str(), msg);
    if (!okB) return false;
    out = Value::boolean(false);
    return true;
  }
  // Implication: a false antecedent makes the whole true, even if the
  // consequent cannot be evaluated.
  if (okA && !a) { out = Value::boolean(true); return true; }
  std::string code = code_, msg = message_;
  const bool okB = ev_bool(*e.args[1], b);
  if (okB && b) { out = Value::boolean(true); return true; }
  if (!okA) return fail(code.c_str(), msg);
  if (!okB) return false;
  out = Value::boolean(false);
  return true;
}

bool Evaluator::ev_compare(const Expr& e, Value& out) {
  const Expr& l = *e.args[0];
  const Expr& r = *e.args[1];
  if (e.binop == BinOp::In || e.binop == BinOp::NotIn || e.binop == BinOp::Colon) {
    Value v;
    bool m;
    if (!ev(l, v) || !member(v, r, m)) return false;
    out = Value::boolean(e.binop == BinOp::NotIn ? !m : m);
    return true;
  }
  Value a, b;
  if (!ev(l, a)) return false;
  if (e.binop == BinOp::Subset) {
    if (a.kind() != ValueKind::Set) return mismatch("⊆", a);
    for (const auto& x : a.items()) {
      bool m;
      if (!member(x, r, m)) return false;
      if (!m) { out = Value::boolean(false); return true; }
    }
    out = Value::boolean(true);
    return true;
  }
  if (!ev(r, b)) return false;
  if (e.binop == BinOp::Eq || e.binop == BinOp::Neq) {
    bool eq;
    if (a.is_numeric() && b.is_numeric()) {
      std::optional<bool> hooked;
      if (e.binop == BinOp::Eq && opt_.eqHook) hooked = opt_.eqHook(e, a.as_real(), b.as_real());
      if (hooked) eq = *hooked;
      else if (opt_.realEqTol > 0) eq = std::fabs(a.as_real() - b.as_real()) <= opt_.realEqTol;
      else eq = a.as_real() == b.as_real();
    } else {
      eq = compare(a, b) == 0;
    }
    out = Value::boolean(e.binop == BinOp::Eq ? eq : !eq);
    return true;
  }
  double x = 0.0, y = 0.0;
  if (!numeric(a, x, "comparison") || !numeric(b, y, "comparison")) return false;
  bool res = false;
  switch (e.binop) {
    case BinOp::Lt: res = x < y; break;
    case BinOp::Le: res = x <= y; break;
    case BinOp::Gt: res = x > y; break;
    case BinOp::Ge: res = x >= y; break;
    default: break;
  }
  out = Value::boolean(res);
  return true;
}

bool Evaluator::ev_arith(const Expr& e, Value& out) {
  Value a, b;
  if (!ev(*e.args[0], a) || !ev(*e.args[1], b)) return false;
  const BinOp op = e.binop;
  if (a.kind() == ValueKind::Set && b.kind() == ValueKind::Set &&
      (op == BinOp::Union || op == BinOp::Inter || op == BinOp::Sub)) {
    std::vector<Value> items;
    if (op == BinOp::Union) {
      items = a.items();
      items.insert(items.end(), b.items().begin(), b.items().end());
    } else {
      for (const auto& x : a.items())
        if (b.contains(x) == (op == BinOp::Inter)) items.push_back(x);
    }
    out = Value::set(std::move(items));
    return true;
  }
  if (op == BinOp::Union || op == BinOp::Inter) return mismatch(op == BinOp::Union ? "∪" : "∩", a.kind() == ValueKind::Set ? b : a);
  if (!a.is_numeric()) return mismatch("arithmetic", a);
  if (!b.is_numeric()) return mismatch("arithmetic", b);
  const bool ints = a.kind() == ValueKind::Int && b.kind() == ValueKind::Int;
  switch (op) {
    case BinOp::Add:
      out = ints ? Value::integer(a.as_int() + b.as_int()) : Value::real(a.as_real() + b.as_real());
      return true;
    case BinOp::Sub:
      out = ints ? Value::integer(a.as_int() - b.as_int()) : Value::real(a.as_real() - b.as_real());
      return true;
    case BinOp::Mul:
      out = ints ? Value::integer(a.as_int() * b.as_int()) : Value::real(a.as_real() * b.as_real());
      return true;
    case BinOp::Div:
      if (b.as_real() == 0.0) return fail("division-by-zero", "division by zero in " + pretty_print(e));
      out = Value::real(a.as_real() / b.as_real());
      return true;
    default:
      return fail("type-mismatch", "unsupported operator");
  }
}

bool Evaluator::ev_call(const Expr& e, Value& out) {
  if (const BuiltinInfo* info = find_builtin(e.text)) {
    if (!info->fn) return fail("not-finite", e.text + "(…) denotes an infinite set");
    std::vector<Value> args(e.args.size());
    for (std::size_t k = 0; k < e.args.size(); ++k)
      if (!ev(*e.args[k], args[k])) return false;
    try {
      out = call_builtin(e.text, args);
    } catch (const EvalError& err) {
      return fail(err.code.c_str(), err.what());
    }
    return true;
  }
  // Application of a sequence- or relation-valued identifier.
  const Value* f = scope_->lookup(e.text);
  if (!f) return fail("unknown-builtin", "unknown function " + e.text);
  if (e.args.size() != 1) return fail("arity-mismatch", e.text + " expects one argument");
  Value arg;
  if (!ev(*e.args[0], arg)) return false;
  if (f->kind() == ValueKind::Seq) {
    std::size_t k;
    if (!index_of(arg, f->items().size(), k)) return false;
    out = f->items()[k];
    return true;
  }
  if (f->kind() == ValueKind::Set) {
    for (const auto& p : f->items()) {
      if (p.kind() == ValueKind::Tuple && p.items().size() == 2 && p.items()[0] == arg) {
        out = p.items()[1];
        return true;
      }
    }
    return fail("index-range", to_string(arg) + " is outside the domain of " + e.text);
  }
  return mismatch("function application", *f);
}

bool Evaluator::qunion_domain(const Expr& q, std::vector<Value>& dom) {
  const Expr& range = *q.args[0];
  if (range.kind != ExprKind::Binary || range.binop != BinOp::In ||
      range.args[0]->kind != ExprKind::Ident || range.args[0]->text != q.text)
    return fail("not-finite", "quantified union needs a range of the form " + q.text + " ∈ S");
  Value s;
  if (!ev(*range.args[1], s)) return false;
  if (s.kind() != ValueKind::Set) return mismatch("quantifier range", s);
  dom = s.items();
  return true;
}

bool Evaluator::ev_qunion(const Expr& e, Value& out) {
  std::vector<Value> dom;
  if (!qunion_domain(e, dom)) return false;
  std::vector<Value> items;
  const Scope* saved = scope_;
  for (const auto& x : dom) {
    OverlayScope inner(saved);
    inner.bind(e.text, x);
    scope_ = &inner;
    Value part;
    const bool ok = ev(*e.args[1], part);
    scope_ = saved;
    if (!ok) return false;
    if (part.kind() != ValueKind::Set) return mismatch("⋃ body", part);
    items.insert(items.end(), part.items().begin(), part.items().end());
  }
  out = Value::set(std::move(items));
  return true;
}

bool Evaluator::member(const Value& v, const Expr& s, bool& out) {
  switch (s.kind) {
    case ExprKind::TypeName: {
      if (s.text == "BOOL") { out = v.kind() == ValueKind::Bool; return true; }
      if (!v.is_numeric()) { out = false; return true; }
      const double x = v.as_real();
      if (s.text == "REAL") out = std::isfinite(x);
      else if (s.text == "INT") out = x == std::floor(x);
      else out = x == std::floor(x) && x >= 0;  // NAT
      return true;
    }
    case ExprKind::EmptySet:
      out = false;
      return true;
    case ExprKind::Call:
      if ((s.text == "POW" || s.text == "seq") && s.args.size() == 1) {
        const ValueKind want = s.text == "POW" ? ValueKind::Set : ValueKind::Seq;
        if (v.kind() != want) { out = false; return true; }
        for (const auto& x : v.items()) {
          bool m;
          if (!member(x, *s.args[0], m)) return false;
          if (!m) { out = false; return true; }
        }
        out = true;
        return true;
      }
      break;
    case ExprKind::Binary:
      if (s.binop == BinOp::Mul) {
        if (v.kind() != ValueKind::Tuple || v.items().size() != 2) { out = false; return true; }
        bool m1, m2;
        if (!member(v.items()[0], *s.args[0], m1)) return false;
        if (!m1) { out = false; return true; }
        if (!member(v.items()[1], *s.args[1], m2)) return false;
        out = m2;
        return true;
      }
      if (s.binop == BinOp::Union || s.binop == BinOp::Inter || s.binop == BinOp::Sub) {
        bool m1, m2;
        if (!member(v, *s.args[0], m1)) return false;
        if (s.binop == BinOp::Union && m1) { out = true; return true; }
        if (s.binop != BinOp::Union && !m1) { out = false; return true; }
        if (!member(v, *s.args[1], m2)) return false;
        out = s.binop == BinOp::Sub ? !m2 : m2;
        return true;
      }
      break;
    case ExprKind::Interval: {
      Value lo, hi;
      double a, b;
      if (!ev(*s.args[0], lo) || !ev(*s.args[1], hi)) return false;
      if (!numeric(lo, a, "interval bound") || !numeric(hi, b, "interval bound")) return false;
      out = v.is_numeric() && a <= v.as_real() && v.as_real() <= b;
      return true;
    }
    case ExprKind::QUnion: {
      std::vector<Value> dom;
      if (!qunion_domain(s, dom)) return false;
      const Scope* saved = scope_;
      for (const auto& x : dom) {
        OverlayScope inner(saved);
        inner.bind(s.text, x);
        scope_ = &inner;
        bool m;
        const bool ok = member(v, *s.args[1], m);
        scope_ = saved;
        if (!ok) return false;
        if (m) { out = true; return true; }
      }
      out = false;
      return true;
    }
    case ExprKind::SetExt: {
      for (const auto& a : s.args) {
        Value x;
        if (!ev(*a, x)) return false;
        if (compare(x, v) == 0) { out = true; return true; }
      }
      out = false;
      return true;
    }
    default:
      break;
  }
  Value set;
  if (!ev(s, set)) return false;
  if (set.kind() == ValueKind::Set) {
    out = set.contains(v);
    return true;
  }
  return mismatch("membership", set);
}

}  // namespace

Value eval(const Expr& e, const Scope& scope, const EvalOptions& opt) {
  Evaluator ev(scope, opt);
  Value out;
  if (!ev.ev(e, out)) throw ev.error();
  return out;
}

Value eval(const ExprPtr& e, const Scope& scope, const EvalOptions& opt) { return eval(*e, scope, opt); }

Value eval(const Expr& e, const Valuation& v, const std::map<std::string, Value>& params,
           const EvalOptions& opt) {
  OverlayScope s(&v);
  for (const auto& [k, x] : params) s.bind(k, x);
  return eval(e, s, opt);
}

bool eval_bool(const Expr& e, const Scope& scope, const EvalOptions& opt) {
  Evaluator ev(scope, opt);
  bool out;
  if (!ev.ev_bool(e, out)) throw ev.error();
  return out;
}

bool eval_guard(const Expr& g, const Valuation& v, double t, const std::string& timeVar,
                const EvalOptions& opt) {
  OverlayScope s(&v);
  s.bind(timeVar, Value::real(t));
  return eval_bool(g, s, opt);
}

std::optional<Value> try_eval(const Expr& e, const Scope& scope, const EvalOptions& opt,
                              EvalError* err) {
  Evaluator ev(scope, opt);
  Value out;
  if (ev.ev(e, out)) return out;
  if (err) *err = ev.error();
  return std::nullopt;
}

bool member_of(const Value& v, const Expr& setExpr, const Scope& scope, const EvalOptions& opt) {
  Evaluator ev(scope, opt);
  bool out;
  if (!ev.member(v, setExpr, out)) throw ev.error();
  return out;
}

}  // namespace heb
