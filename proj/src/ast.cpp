#include "heb/ast.hpp"

#include <sstream>

namespace heb {

namespace {

ExprPtr finish(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

Expr base(ExprKind k, SourceLoc loc) {
  Expr e;
  e.kind = k;
  e.loc = std::move(loc);
  return e;
}

}  // namespace

ExprPtr make_number(Rational r, std::string spelling, SourceLoc loc) {
  Expr e = base(ExprKind::Number, std::move(loc));
  e.number = r;
  e.text = std::move(spelling);
  return finish(std::move(e));
}

ExprPtr make_ident(std::string name, SourceLoc loc) {
  Expr e = base(ExprKind::Ident, std::move(loc));
  e.text = std::move(name);
  return finish(std::move(e));
}

ExprPtr make_bool(bool b, SourceLoc loc) {
  Expr e = base(ExprKind::BoolLit, std::move(loc));
  e.boolValue = b;
  return finish(std::move(e));
}

ExprPtr make_type(std::string name, SourceLoc loc) {
  Expr e = base(ExprKind::TypeName, std::move(loc));
  e.text = std::move(name);
  return finish(std::move(e));
}

ExprPtr make_empty(SourceLoc loc) { return finish(base(ExprKind::EmptySet, std::move(loc))); }

ExprPtr make_unary(UnOp op, ExprPtr a, SourceLoc loc) {
  Expr e = base(ExprKind::Unary, std::move(loc));
  e.unop = op;
  e.args = {std::move(a)};
  return finish(std::move(e));
}

ExprPtr make_binary(BinOp op, ExprPtr a, ExprPtr b, SourceLoc loc) {
  Expr e = base(ExprKind::Binary, std::move(loc));
  e.binop = op;
  e.args = {std::move(a), std::move(b)};
  return finish(std::move(e));
}

ExprPtr make_set(std::vector<ExprPtr> elems, SourceLoc loc) {
  Expr e = base(ExprKind::SetExt, std::move(loc));
  e.args = std::move(elems);
  return finish(std::move(e));
}

ExprPtr make_seq(std::vector<ExprPtr> elems, SourceLoc loc) {
  Expr e = base(ExprKind::SeqExt, std::move(loc));
  e.args = std::move(elems);
  return finish(std::move(e));
}

ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourceLoc loc) {
  Expr e = base(ExprKind::Call, std::move(loc));
  e.text = std::move(name);
  e.args = std::move(args);
  return finish(std::move(e));
}

ExprPtr make_index(ExprPtr b, ExprPtr index, SourceLoc loc) {
  Expr e = base(ExprKind::Index, std::move(loc));
  e.args = {std::move(b), std::move(index)};
  return finish(std::move(e));
}

ExprPtr make_interval(ExprPtr lo, ExprPtr hi, SourceLoc loc) {
  Expr e = base(ExprKind::Interval, std::move(loc));
  e.args = {std::move(lo), std::move(hi)};
  return finish(std::move(e));
}

ExprPtr make_qunion(std::string var, ExprPtr range, ExprPtr body, SourceLoc loc) {
  Expr e = base(ExprKind::QUnion, std::move(loc));
  e.text = std::move(var);
  e.args = {std::move(range), std::move(body)};
  return finish(std::move(e));
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_equal(*a, *b);
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::Number:
      if (!(a.number == b.number)) return false;
      break;
    case ExprKind::Ident:
    case ExprKind::TypeName:
    case ExprKind::Call:
    case ExprKind::QUnion:
      if (a.text != b.text) return false;
      break;
    case ExprKind::BoolLit:
      if (a.boolValue != b.boolValue) return false;
      break;
    case ExprKind::Unary:
      if (a.unop != b.unop) return false;
      break;
    case ExprKind::Binary:
      if (a.binop != b.binop) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!expr_equal(a.args[i], b.args[i])) return false;
  return true;
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  if (!e) return out;
  if (e->kind == ExprKind::Binary && e->binop == BinOp::And) {
    for (const auto& a : e->args) {
      auto sub = conjuncts(a);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  } else {
    out.push_back(e);
  }
  return out;
}

ExprPtr conjoin(const std::vector<ExprPtr>& parts) {
  if (parts.empty()) return make_bool(true);
  ExprPtr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = make_binary(BinOp::And, acc, parts[i]);
  return acc;
}

std::vector<const ClauseAst*> ConstructAst::clauses_of(ClauseKind k) const {
  std::vector<const ClauseAst*> out;
  for (const auto& c : clauses)
    if (c.kind == k) out.push_back(&c);
  return out;
}

std::vector<std::string> ConstructAst::names_of(ClauseKind k) const {
  std::vector<std::string> out;
  for (const auto* c : clauses_of(k)) out.insert(out.end(), c->names.begin(), c->names.end());
  return out;
}

namespace {

bool assigns_equal(const std::vector<AssignAst>& a, const std::vector<AssignAst>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].target != b[i].target || !expr_equal(a[i].value, b[i].value) ||
        !expr_equal(a[i].becomesSuchThat, b[i].becomesSuchThat))
      return false;
  }
  return true;
}

bool exprs_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!expr_equal(a[i], b[i])) return false;
  return true;
}

bool event_equal(const EventAst& a, const EventAst& b) {
  if (a.name != b.name || a.status != b.status || !(a.params == b.params)) return false;
  if (!exprs_equal(a.guard, b.guard) || !exprs_equal(a.initGuard, b.initGuard)) return false;
  const auto& x = a.body;
  const auto& y = b.body;
  if (!assigns_equal(x.assignments, y.assignments) || !assigns_equal(x.solveAssigns, y.solveAssigns))
    return false;
  if (x.hasSolve != y.hasSolve || x.odes.size() != y.odes.size()) return false;
  for (std::size_t i = 0; i < x.odes.size(); ++i)
    if (x.odes[i].var != y.odes[i].var || !expr_equal(x.odes[i].rhs, y.odes[i].rhs)) return false;
  if (x.comply.has_value() != y.comply.has_value()) return false;
  if (x.comply && (x.comply->invariants != y.comply->invariants ||
                   !exprs_equal(x.comply->preds, y.comply->preds)))
    return false;
  return true;
}

bool clause_equal(const ClauseAst& a, const ClauseAst& b) {
  if (a.kind != b.kind || a.names != b.names || !exprs_equal(a.preds, b.preds) ||
      !assigns_equal(a.assigns, b.assigns) || a.events.size() != b.events.size())
    return false;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    if (!event_equal(a.events[i], b.events[i])) return false;
  if (a.include.has_value() != b.include.has_value()) return false;
  if (a.include) {
    const auto& x = *a.include;
    const auto& y = *b.include;
    if (x.kind != y.kind || x.name != y.name || x.instance.has_value() != y.instance.has_value())
      return false;
    if (x.instance && (x.instance->source != y.instance->source ||
                       x.instance->substitutions != y.instance->substitutions))
      return false;
  }
  if (a.synch.has_value() != b.synch.has_value()) return false;
  if (a.synch && (a.synch->name != b.synch->name || a.synch->members != b.synch->members))
    return false;
  return true;
}

}  // namespace

bool construct_equal(const ConstructAst& a, const ConstructAst& b) {
  if (a.kind != b.kind || a.name != b.name || a.clauses.size() != b.clauses.size()) return false;
  for (std::size_t i = 0; i < a.clauses.size(); ++i)
    if (!clause_equal(a.clauses[i], b.clauses[i])) return false;
  return true;
}

const char* construct_keyword(ConstructKind k) {
  switch (k) {
    case ConstructKind::Project: return "PROJECT";
    case ConstructKind::Machine: return "MACHINE";
    case ConstructKind::Context: return "CONTEXT";
    case ConstructKind::Interface: return "INTERFACE";
    case ConstructKind::GlobInvs: return "GLOBINVS";
  }
  return "?";
}

const char* clause_keyword(ClauseKind k) {
  switch (k) {
    case ClauseKind::Sees: return "SEES";
    case ClauseKind::Connects: return "CONNECTS";
    case ClauseKind::Reads: return "READS";
    case ClauseKind::Refers: return "REFERS";
    case ClauseKind::Time: return "TIME";
    case ClauseKind::Clock: return "CLOCK";
    case ClauseKind::Pliant: return "PLIANT";
    case ClauseKind::Variables: return "VARIABLES";
    case ClauseKind::Invariants: return "INVARIANTS";
    case ClauseKind::Theorems: return "THEOREMS";
    case ClauseKind::Sets: return "SETS";
    case ClauseKind::Constants: return "CONSTANTS";
    case ClauseKind::Axioms: return "AXIOMS";
    case ClauseKind::Initialisation: return "INITIALISATION";
    case ClauseKind::Events: return "EVENTS";
    case ClauseKind::Include: return "INCLUDE";
    case ClauseKind::Synch: return "SYNCH";
  }
  return "?";
}

const char* status_name(EventStatus s) {
  switch (s) {
    case EventStatus::Ordinary: return "ordinary";
    case EventStatus::Pliant: return "pliant";
    case EventStatus::Asynch: return "asynch";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expression printing

namespace {

int precedence(const Expr& e) {
  if (e.kind == ExprKind::Unary) return e.unop == UnOp::Not ? 4 : 9;
  if (e.kind != ExprKind::Binary) return 11;
  switch (e.binop) {
    case BinOp::Implies: return 1;
    case BinOp::Or: return 2;
    case BinOp::And: return 3;
    case BinOp::Eq: case BinOp::Neq: case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
    case BinOp::Ge: case BinOp::In: case BinOp::NotIn: case BinOp::Colon: case BinOp::Subset:
      return 5;
    case BinOp::Maplet: return 6;
    case BinOp::Add: case BinOp::Sub: case BinOp::Union: case BinOp::Inter: return 7;
    case BinOp::Mul: case BinOp::Div: return 8;
  }
  return 11;
}

const char* binop_symbol(BinOp op) {
  switch (op) {
    case BinOp::Implies: return "⇒";
    case BinOp::Or: return "∨";
    case BinOp::And: return "∧";
    case BinOp::Eq: return "=";
    case BinOp::Neq: return "≠";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "≤";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return "≥";
    case BinOp::In: return "∈";
    case BinOp::NotIn: return "∉";
    case BinOp::Colon: return ":";
    case BinOp::Subset: return "⊆";
    case BinOp::Maplet: return "↦";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "−";
    case BinOp::Union: return "∪";
    case BinOp::Inter: return "∩";
    case BinOp::Mul: return "×";
    case BinOp::Div: return "/";
  }
  return "?";
}

void print_expr(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, bool wrap) {
  if (wrap) os << '(';
  print_expr(os, child);
  if (wrap) os << ')';
}

void print_list(std::ostream& os, const std::vector<ExprPtr>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, *xs[i]);
  }
}

void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Number: os << e.text; return;
    case ExprKind::Ident: os << e.text; return;
    case ExprKind::BoolLit: os << (e.boolValue ? "TRUE" : "FALSE"); return;
    case ExprKind::TypeName:
      if (e.text == "REAL") os << "ℝ";
      else if (e.text == "NAT") os << "ℕ";
      else if (e.text == "INT") os << "ℤ";
      else os << e.text;
      return;
    case ExprKind::EmptySet: os << "∅"; return;
    case ExprKind::Unary: {
      const Expr& a = *e.args[0];
      if (e.unop == UnOp::Not) {
        os << "¬ ";
        print_child(os, a, precedence(a) < 4);
      } else {
        os << "−";
        print_child(os, a, precedence(a) < 9 || (a.kind == ExprKind::Unary));
      }
      return;
    }
    case ExprKind::Binary: {
      const int p = precedence(e);
      const Expr& l = *e.args[0];
      const Expr& r = *e.args[1];
      const bool rightAssoc = e.binop == BinOp::Implies;
      const bool nonAssoc = p == 5;
      const int pl = precedence(l);
      const int pr = precedence(r);
      print_child(os, l, pl < p || (pl == p && (rightAssoc || nonAssoc)));
      os << ' ' << binop_symbol(e.binop) << ' ';
      print_child(os, r, pr < p || (pr == p && !rightAssoc));
      return;
    }
    case ExprKind::SetExt:
      os << '{';
      print_list(os, e.args);
      os << '}';
      return;
    case ExprKind::SeqExt:
      os << "⟨";
      print_list(os, e.args);
      os << "⟩";
      return;
    case ExprKind::Call:
      os << (e.text == "POW" ? "ℙ" : e.text) << '(';
      print_list(os, e.args);
      os << ')';
      return;
    case ExprKind::Index:
      print_child(os, *e.args[0], precedence(*e.args[0]) < 10);
      os << '[';
      print_expr(os, *e.args[1]);
      os << ']';
      return;
    case ExprKind::Interval:
      os << '[';
      print_expr(os, *e.args[0]);
      os << " … ";
      print_expr(os, *e.args[1]);
      os << ']';
      return;
    case ExprKind::QUnion:
      os << "⋃(" << e.text << " • ";
      print_expr(os, *e.args[0]);
      os << " | ";
      print_expr(os, *e.args[1]);
      os << ')';
      return;
  }
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += xs[i];
  }
  return out;
}

void print_assign(std::ostream& os, const AssignAst& a, const char* indent) {
  os << indent << a.target;
  if (a.becomesSuchThat) os << " :| " << pretty_print(*a.becomesSuchThat) << '\n';
  else os << " := " << pretty_print(*a.value) << '\n';
}

void print_preds(std::ostream& os, const std::vector<ExprPtr>& ps, const char* indent) {
  for (const auto& p : ps) os << indent << pretty_print(*p) << '\n';
}

std::string param_text(const ParamAst& p) {
  switch (p.dir) {
    case ParamDir::Input: return p.name + "?";
    case ParamDir::Output: return p.name + "!";
    case ParamDir::Local: return p.name;
  }
  return p.name;
}

void print_event(std::ostream& os, const EventAst& ev) {
  os << "  " << ev.name << '\n';
  os << "    STATUS " << status_name(ev.status) << '\n';
  const char* guardKw = "WHEN";
  if (!ev.params.empty()) {
    std::vector<std::string> ps;
    for (const auto& p : ev.params) ps.push_back(param_text(p));
    os << "    ANY " << join(ps);
    guardKw = "WHERE";
    if (ev.guard.size() == 1) {
      os << " WHERE " << pretty_print(*ev.guard[0]) << '\n';
      guardKw = nullptr;
    } else {
      os << '\n';
    }
  }
  if (guardKw && !ev.guard.empty()) {
    os << "    " << guardKw << '\n';
    print_preds(os, ev.guard, "      ");
  }
  if (!ev.initGuard.empty()) {
    os << "    INIT\n";
    print_preds(os, ev.initGuard, "      ");
  }
  if (!ev.body.assignments.empty()) {
    os << "    BEGIN\n";
    for (const auto& a : ev.body.assignments) print_assign(os, a, "      ");
  }
  if (ev.body.comply) {
    os << "    COMPLY\n";
    if (ev.body.comply->invariants) os << "      INVARIANTS\n";
    print_preds(os, ev.body.comply->preds, "      ");
  }
  if (ev.body.hasSolve) {
    os << "    SOLVE\n";
    for (const auto& o : ev.body.odes) os << "      𝒟 " << o.var << " = " << pretty_print(*o.rhs) << '\n';
    for (const auto& a : ev.body.solveAssigns) print_assign(os, a, "      ");
  }
  os << "    END\n";
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string pretty_print(const ExprPtr& e) { return e ? pretty_print(*e) : std::string(); }

std::string pretty_print(const ConstructAst& c) {
  std::ostringstream os;
  os << construct_keyword(c.kind) << ' ' << c.name << '\n';
  for (const auto& cl : c.clauses) {
    switch (cl.kind) {
      case ClauseKind::Sees: case ClauseKind::Connects: case ClauseKind::Reads:
      case ClauseKind::Refers: case ClauseKind::Time: case ClauseKind::Clock:
      case ClauseKind::Pliant: case ClauseKind::Variables: case ClauseKind::Sets:
      case ClauseKind::Constants:
        os << clause_keyword(cl.kind) << ' ' << join(cl.names) << '\n';
        break;
      case ClauseKind::Invariants: case ClauseKind::Theorems: case ClauseKind::Axioms:
        os << clause_keyword(cl.kind) << '\n';
        print_preds(os, cl.preds, "  ");
        break;
      case ClauseKind::Initialisation:
        os << "INITIALISATION\n";
        for (const auto& a : cl.assigns) print_assign(os, a, "  ");
        break;
      case ClauseKind::Events:
        os << "EVENTS\n";
        for (const auto& ev : cl.events) print_event(os, ev);
        break;
      case ClauseKind::Include: {
        const auto& inc = *cl.include;
        os << construct_keyword(inc.kind) << ' ' << inc.name;
        if (inc.instance) {
          os << " IS " << inc.instance->source << " WITH\n";
          for (const auto& [from, to] : inc.instance->substitutions)
            os << "  " << from << " → " << to << '\n';
          os << "END";
        }
        os << '\n';
        break;
      }
      case ClauseKind::Synch: {
        const auto& s = *cl.synch;
        os << "SYNCH " << s.name << '\n';
        for (const auto& [m, e] : s.members) os << "  " << m << '.' << e << '\n';
        os << "END\n";
        break;
      }
    }
  }
  os << "END\n";
  return os.str();
}

namespace {

void collect_free(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (e.kind) {
    case ExprKind::Ident:
      if (!bound.count(e.text)) out.insert(e.text);
      return;
    case ExprKind::Call:
      if (!is_builtin_name(e.text) && !bound.count(e.text)) out.insert(e.text);
      break;
    case ExprKind::QUnion: {
      const bool wasBound = bound.count(e.text) > 0;
      bound.insert(e.text);
      for (const auto& a : e.args) collect_free(*a, bound, out);
      if (!wasBound) bound.erase(e.text);
      return;
    }
    default:
      break;
  }
  for (const auto& a : e.args) collect_free(*a, bound, out);
}

}  // namespace

std::set<std::string> free_identifiers(const ExprPtr& e, const std::set<std::string>& bound) {
  std::set<std::string> out;
  if (!e) return out;
  std::set<std::string> b = bound;
  collect_free(*e, b, out);
  return out;
}

}  // namespace heb
