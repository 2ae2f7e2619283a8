#include "heb/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace heb {

using detail::Token;
using detail::TokKind;

namespace {

struct SyntaxError {
  SourceLoc loc;
  std::string message;
};

bool is_relop(const std::string& s, BinOp& op) {
  static const std::map<std::string, BinOp> ops = {
      {"=", BinOp::Eq}, {"≠", BinOp::Neq}, {"<", BinOp::Lt}, {"≤", BinOp::Le},
      {">", BinOp::Gt}, {"≥", BinOp::Ge}, {"∈", BinOp::In}, {"∉", BinOp::NotIn},
      {":", BinOp::Colon}, {"⊆", BinOp::Subset}};
  auto it = ops.find(s);
  if (it == ops.end()) return false;
  op = it->second;
  return true;
}

bool is_predicate_shaped(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Binary:
      return e->binop == BinOp::Implies || e->binop == BinOp::Or || e->binop == BinOp::And ||
             e->binop == BinOp::Eq || e->binop == BinOp::Neq || e->binop == BinOp::Lt ||
             e->binop == BinOp::Le || e->binop == BinOp::Gt || e->binop == BinOp::Ge ||
             e->binop == BinOp::In || e->binop == BinOp::NotIn || e->binop == BinOp::Colon ||
             e->binop == BinOp::Subset;
    case ExprKind::Unary: return e->unop == UnOp::Not;
    case ExprKind::Call:
    case ExprKind::BoolLit: return true;
    default: return false;
  }
}

// Clause kinds that may appear at most once per construct.
bool is_unique_clause(ClauseKind k) {
  switch (k) {
    case ClauseKind::Time: case ClauseKind::Variables: case ClauseKind::Pliant:
    case ClauseKind::Invariants: case ClauseKind::Events: case ClauseKind::Constants:
    case ClauseKind::Sets: case ClauseKind::Axioms: case ClauseKind::Theorems:
    case ClauseKind::Initialisation:
      return true;
    default:
      return false;
  }
}

bool clause_kind_of(const std::string& kw, ClauseKind& k) {
  static const std::map<std::string, ClauseKind> kinds = {
      {"SEES", ClauseKind::Sees}, {"CONNECTS", ClauseKind::Connects},
      {"READS", ClauseKind::Reads}, {"REFERS", ClauseKind::Refers},
      {"TIME", ClauseKind::Time}, {"CLOCK", ClauseKind::Clock},
      {"PLIANT", ClauseKind::Pliant}, {"VARIABLES", ClauseKind::Variables},
      {"INVARIANTS", ClauseKind::Invariants}, {"THEOREMS", ClauseKind::Theorems},
      {"SETS", ClauseKind::Sets}, {"CONSTANTS", ClauseKind::Constants},
      {"AXIOMS", ClauseKind::Axioms}, {"INITIALISATION", ClauseKind::Initialisation},
      {"EVENTS", ClauseKind::Events}};
  auto it = kinds.find(kw);
  if (it == kinds.end()) return false;
  k = it->second;
  return true;
}

ConstructKind construct_kind_of(const std::string& kw) {
  if (kw == "PROJECT") return ConstructKind::Project;
  if (kw == "CONTEXT") return ConstructKind::Context;
  if (kw == "INTERFACE") return ConstructKind::Interface;
  if (kw == "GLOBINVS") return ConstructKind::GlobInvs;
  return ConstructKind::Machine;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Diagnostics& diags) : toks_(std::move(toks)), diags_(diags) {}

  std::vector<ConstructAst> parse_file(std::vector<ConstructSpan>& spans) {
    std::vector<ConstructAst> out;
    while (true) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == TokKind::Eof) break;
      if (t.kind == TokKind::Keyword && detail::is_construct_keyword(t.text)) {
        const std::size_t begin = t.begin;
        auto c = parse_construct();
        if (c) {
          spans.push_back({begin, lastEnd_, c->name});
          out.push_back(std::move(*c));
        }
        continue;
      }
      error("syntax-error", "expected MACHINE, CONTEXT, INTERFACE, PROJECT or GLOBINVS", t.loc);
      skip_to_construct();
    }
    return out;
  }

  ExprPtr parse_whole_expression() {
    try {
      skip_newlines();
      ExprPtr e = parse_expr();
      skip_newlines();
      if (peek().kind != TokKind::Eof) throw SyntaxError{peek().loc, "trailing input"};
      return e;
    } catch (const SyntaxError& err) {
      error("syntax-error", err.message, err.loc);
      return nullptr;
    }
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Diagnostics& diags_;
  std::size_t lastEnd_ = 0;

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    lastEnd_ = t.end;
    return t;
  }
  bool at_sym(const char* s, std::size_t k = 0) const {
    return peek(k).kind == TokKind::Sym && peek(k).text == s;
  }
  bool at_kw(const char* s) const { return peek().kind == TokKind::Keyword && peek().text == s; }
  bool at_line_end() const {
    return peek().kind == TokKind::Newline || peek().kind == TokKind::Eof;
  }
  bool at_block_end() const {
    return peek().kind == TokKind::Keyword || peek().kind == TokKind::Eof;
  }
  bool accept_sym(const char* s) {
    if (!at_sym(s)) return false;
    next();
    return true;
  }
  void expect_sym(const char* s) {
    if (!accept_sym(s))
      throw SyntaxError{peek().loc, std::string("expected '") + s + "' but found '" + describe(peek()) + "'"};
  }
  std::string expect_ident() {
    if (peek().kind != TokKind::Ident)
      throw SyntaxError{peek().loc, "expected identifier but found '" + describe(peek()) + "'"};
    return next().text;
  }
  static std::string describe(const Token& t) {
    if (t.kind == TokKind::Eof) return "end of file";
    if (t.kind == TokKind::Newline) return "end of line";
    return t.text;
  }
  void skip_newlines() {
    while (peek().kind == TokKind::Newline) next();
  }
  void skip_line() {
    while (!at_line_end()) next();
    skip_newlines();
  }
  void skip_to_construct() {
    while (peek().kind != TokKind::Eof &&
           !(peek().kind == TokKind::Keyword && detail::is_construct_keyword(peek().text)))
      next();
  }
  void error(const std::string& code, const std::string& msg, const SourceLoc& loc) {
    diags_.push_back(make_error(code, msg, loc));
  }
  // Ends a header line; anything else on the line is reported and skipped.
  void end_line() {
    if (at_line_end()) {
      skip_newlines();
      return;
    }
    if (peek().kind == TokKind::Keyword) return;
    error("syntax-error", "unexpected '" + describe(peek()) + "'", peek().loc);
    skip_line();
  }

  // ---- constructs -------------------------------------------------------

  std::optional<ConstructAst> parse_construct() {
    const Token kw = next();
    ConstructAst c;
    c.kind = construct_kind_of(kw.text);
    c.loc = kw.loc;
    if (peek().kind != TokKind::Ident) {
      error("syntax-error", "expected a name after " + kw.text, peek().loc);
      next();
      skip_to_construct();
      return std::nullopt;
    }
    c.name = next().text;
    end_line();
    if (c.kind == ConstructKind::Project) parse_project_body(c);
    else parse_body(c);
    return c;
  }

  void missing_end(const std::string& what, const SourceLoc& loc) {
    error("missing-end", what + " has no matching END", loc);
  }

  void parse_body(ConstructAst& c) {
    std::set<ClauseKind> seen;
    while (true) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == TokKind::Eof) {
        missing_end(std::string(construct_keyword(c.kind)) + " " + c.name, c.loc);
        return;
      }
      if (t.kind == TokKind::Keyword) {
        if (t.text == "END") {
          next();
          end_line();
          return;
        }
        if (detail::is_construct_keyword(t.text)) {
          missing_end(std::string(construct_keyword(c.kind)) + " " + c.name, c.loc);
          return;
        }
        ClauseKind k;
        if (clause_kind_of(t.text, k)) {
          ClauseAst cl = parse_clause(k);
          if (is_unique_clause(k) && seen.count(k)) {
            error("duplicate-clause", std::string(clause_keyword(k)) + " appears more than once in " + c.name,
                  cl.loc);
          } else {
            seen.insert(k);
            c.clauses.push_back(std::move(cl));
          }
          continue;
        }
      }
      error("syntax-error", "unexpected '" + describe(t) + "'", t.loc);
      next();
      skip_line();
    }
  }

  ClauseAst parse_clause(ClauseKind k) {
    ClauseAst cl;
    cl.kind = k;
    cl.loc = next().loc;
    switch (k) {
      case ClauseKind::Invariants: case ClauseKind::Theorems: case ClauseKind::Axioms:
        parse_pred_block(cl.preds);
        break;
      case ClauseKind::Initialisation:
        parse_assign_block(cl.assigns);
        break;
      case ClauseKind::Events:
        parse_events(cl.events);
        break;
      default:
        parse_name_list(cl.names);
        break;
    }
    return cl;
  }

  void parse_name_list(std::vector<std::string>& names) {
    while (true) {
      skip_newlines();
      if (at_block_end()) return;
      if (peek().kind == TokKind::Ident) {
        names.push_back(next().text);
        accept_sym(",");
        continue;
      }
      error("syntax-error", "expected a name but found '" + describe(peek()) + "'", peek().loc);
      skip_line();
    }
  }

  // ---- predicate and assignment lines ------------------------------------

  void parse_pred_block(std::vector<ExprPtr>& preds) {
    while (true) {
      skip_newlines();
      if (at_block_end()) return;
      try {
        auto line = parse_pred_line();
        preds.insert(preds.end(), line.begin(), line.end());
        if (!at_line_end() && peek().kind != TokKind::Keyword)
          throw SyntaxError{peek().loc, "unexpected '" + describe(peek()) + "'"};
      } catch (const SyntaxError& err) {
        error("syntax-error", err.message, err.loc);
        skip_line();
      }
    }
  }

  std::vector<ExprPtr> parse_pred_line() {
    const SourceLoc loc = peek().loc;
    std::vector<ExprPtr> items = parse_expr_list();
    if (items.size() == 1) return items;

    // `a , b : T1 , T2` declares each name with its own type; `a , b : T`
    // gives every name the same type.
    std::size_t i = 0;
    while (i < items.size() && items[i]->kind == ExprKind::Ident) ++i;
    if (i < items.size() && items[i]->kind == ExprKind::Binary &&
        (items[i]->binop == BinOp::Colon || items[i]->binop == BinOp::In) &&
        items[i]->args[0]->kind == ExprKind::Ident) {
      std::vector<ExprPtr> names(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(i));
      names.push_back(items[i]->args[0]);
      std::vector<ExprPtr> types{items[i]->args[1]};
      types.insert(types.end(), items.begin() + static_cast<std::ptrdiff_t>(i) + 1, items.end());
      const bool rest_are_types = std::none_of(types.begin() + 1, types.end(), is_predicate_shaped);
      if (rest_are_types && (types.size() == names.size() || (types.size() == 1 && names.size() > 1))) {
        std::vector<ExprPtr> out;
        for (std::size_t k = 0; k < names.size(); ++k)
          out.push_back(make_binary(items[i]->binop, names[k], types.size() == 1 ? types[0] : types[k],
                                    names[k]->loc));
        return out;
      }
    }
    if (std::all_of(items.begin(), items.end(), is_predicate_shaped)) return items;
    throw SyntaxError{loc, "cannot read comma-separated line as predicates"};
  }

  void parse_assign_block(std::vector<AssignAst>& out) {
    while (true) {
      skip_newlines();
      if (at_block_end()) return;
      try {
        parse_assign_line(out);
        if (!at_line_end() && peek().kind != TokKind::Keyword)
          throw SyntaxError{peek().loc, "unexpected '" + describe(peek()) + "'"};
      } catch (const SyntaxError& err) {
        error("syntax-error", err.message, err.loc);
        skip_line();
      }
    }
  }

  std::string parse_target() {
    std::string name = expect_ident();
    if (!accept_sym("?")) accept_sym("!");
    return name;
  }

  void parse_assign_line(std::vector<AssignAst>& out) {
    const SourceLoc loc = peek().loc;
    std::vector<std::string> targets{parse_target()};
    while (accept_sym(",")) targets.push_back(parse_target());
    if (accept_sym(":|")) {
      ExprPtr pred = parse_expr();
      for (auto& tgt : targets) out.push_back(AssignAst{tgt, nullptr, pred, loc});
      return;
    }
    expect_sym(":=");
    std::vector<ExprPtr> values = parse_expr_list();
    if (values.size() != targets.size())
      throw SyntaxError{loc, "assignment has " + std::to_string(targets.size()) + " targets but " +
                                 std::to_string(values.size()) + " values"};
    for (std::size_t k = 0; k < targets.size(); ++k)
      out.push_back(AssignAst{targets[k], values[k], nullptr, loc});
  }

  // ---- events -------------------------------------------------------------

  void parse_events(std::vector<EventAst>& events) {
    while (true) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == TokKind::Ident || (t.kind == TokKind::Keyword && t.text == "INITIALISATION")) {
        events.push_back(parse_event());
        continue;
      }
      if (t.kind == TokKind::Keyword || t.kind == TokKind::Eof) return;
      error("syntax-error", "expected an event name but found '" + describe(t) + "'", t.loc);
      skip_line();
    }
  }

  EventAst parse_event() {
    EventAst ev;
    const Token& nameTok = next();
    ev.name = nameTok.text;
    ev.loc = nameTok.loc;
    end_line();
    std::set<std::string> seen;
    bool sawBody = false;
    while (true) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == TokKind::Eof) {
        missing_end("event " + ev.name, ev.loc);
        break;
      }
      if (t.kind == TokKind::Ident) {
        missing_end("event " + ev.name, ev.loc);
        break;
      }
      if (t.kind != TokKind::Keyword) {
        error("syntax-error", "unexpected '" + describe(t) + "'", t.loc);
        skip_line();
        continue;
      }
      if (t.text == "END") {
        next();
        end_line();
        break;
      }
      std::string group = t.text;
      if (group == "WHEN") group = "WHERE";
      if (group == "THEN") group = "BEGIN";
      static const std::set<std::string> subs = {"STATUS", "ANY", "WHERE", "INIT", "BEGIN", "COMPLY", "SOLVE"};
      if (!subs.count(group)) {
        missing_end("event " + ev.name, ev.loc);
        break;
      }
      const SourceLoc subLoc = t.loc;
      const bool duplicate = seen.count(group) > 0;
      seen.insert(group);
      EventAst scratch;
      EventAst& target = duplicate ? scratch : ev;
      next();
      try {
        if (group == "STATUS") {
          const std::string s = expect_ident();
          if (s == "ordinary") target.status = EventStatus::Ordinary;
          else if (s == "pliant") target.status = EventStatus::Pliant;
          else if (s == "asynch") target.status = EventStatus::Asynch;
          else throw SyntaxError{subLoc, "unknown event status '" + s + "'"};
        } else if (group == "ANY") {
          while (peek().kind == TokKind::Ident) {
            ParamAst p;
            p.name = next().text;
            if (accept_sym("?")) p.dir = ParamDir::Input;
            else if (accept_sym("!")) p.dir = ParamDir::Output;
            target.params.push_back(p);
            if (!accept_sym(",")) break;
          }
          if (!at_line_end() && peek().kind != TokKind::Keyword)
            throw SyntaxError{peek().loc, "unexpected '" + describe(peek()) + "' in ANY"};
        } else if (group == "WHERE") {
          parse_pred_block(target.guard);
        } else if (group == "INIT") {
          parse_pred_block(target.initGuard);
        } else if (group == "BEGIN") {
          sawBody = true;
          parse_assign_block(target.body.assignments);
        } else if (group == "COMPLY") {
          target.body.comply = ComplyAst{};
          skip_newlines();
          if (at_kw("INVARIANTS")) {
            next();
            target.body.comply->invariants = true;
          }
          parse_pred_block(target.body.comply->preds);
        } else if (group == "SOLVE") {
          target.body.hasSolve = true;
          parse_solve_block(target.body);
        }
      } catch (const SyntaxError& err) {
        error("syntax-error", err.message, err.loc);
        skip_line();
      }
      if (duplicate)
        error("duplicate-clause", t.text + " appears more than once in event " + ev.name, subLoc);
    }
    check_event_shape(ev, sawBody);
    return ev;
  }

  void check_event_shape(EventAst& ev, bool sawBody) {
    if (ev.status == EventStatus::Pliant) {
      if (sawBody) {
        error("syntax-error", "pliant event " + ev.name + " has a discrete assignment block", ev.loc);
        ev.body.assignments.clear();
      }
    } else if (ev.body.hasSolve || ev.body.comply) {
      error("syntax-error", "mode event " + ev.name + " has a SOLVE or COMPLY clause", ev.loc);
      ev.body.hasSolve = false;
      ev.body.odes.clear();
      ev.body.solveAssigns.clear();
      ev.body.comply.reset();
    }
    if (ev.status != EventStatus::Pliant && !ev.initGuard.empty()) {
      error("syntax-error", "mode event " + ev.name + " has an INIT clause", ev.loc);
      ev.initGuard.clear();
    }
    std::set<std::string> targets;
    auto claim = [&](const std::string& v, const SourceLoc& loc) {
      if (!targets.insert(v).second)
        error("syntax-error", "variable " + v + " is updated twice in event " + ev.name, loc);
    };
    for (const auto& a : ev.body.assignments) claim(a.target, a.loc);
    for (const auto& o : ev.body.odes) claim(o.var, o.loc);
    for (const auto& a : ev.body.solveAssigns) claim(a.target, a.loc);
  }

  void parse_solve_block(EventBody& body) {
    while (true) {
      skip_newlines();
      if (at_block_end()) return;
      try {
        const SourceLoc loc = peek().loc;
        const bool unicodeD = at_sym("𝒟");
        const bool asciiD = peek().kind == TokKind::Ident && peek().text == "D" &&
                            peek(1).kind == TokKind::Ident && (at_sym("=", 2) || at_sym(":=", 2));
        if (unicodeD || asciiD) {
          next();
          OdeAst ode;
          ode.loc = loc;
          ode.var = expect_ident();
          if (!accept_sym(":=")) expect_sym("=");
          ode.rhs = parse_expr();
          body.odes.push_back(std::move(ode));
        } else {
          parse_assign_line(body.solveAssigns);
        }
        if (!at_line_end() && peek().kind != TokKind::Keyword)
          throw SyntaxError{peek().loc, "unexpected '" + describe(peek()) + "'"};
      } catch (const SyntaxError& err) {
        error("syntax-error", err.message, err.loc);
        skip_line();
      }
    }
  }

  // ---- project ------------------------------------------------------------

  void parse_project_body(ConstructAst& c) {
    while (true) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == TokKind::Eof) {
        missing_end("PROJECT " + c.name, c.loc);
        return;
      }
      if (t.kind == TokKind::Keyword && t.text == "END") {
        next();
        end_line();
        return;
      }
      if (t.kind == TokKind::Keyword && t.text == "PROJECT") {
        missing_end("PROJECT " + c.name, c.loc);
        return;
      }
      try {
        if (t.kind == TokKind::Keyword && detail::is_construct_keyword(t.text)) {
          c.clauses.push_back(parse_include());
          continue;
        }
        if (t.kind == TokKind::Keyword && t.text == "SYNCH") {
          c.clauses.push_back(parse_synch());
          continue;
        }
        throw SyntaxError{t.loc, "unexpected '" + describe(t) + "' in PROJECT"};
      } catch (const SyntaxError& err) {
        error("syntax-error", err.message, err.loc);
        skip_line();
      }
    }
  }

  ClauseAst parse_include() {
    ClauseAst cl;
    cl.kind = ClauseKind::Include;
    const Token& kw = next();
    cl.loc = kw.loc;
    IncludeAst inc;
    inc.kind = construct_kind_of(kw.text);
    inc.name = expect_ident();
    if (at_kw("IS")) {
      next();
      skip_newlines();
      RenamingAst r;
      r.source = expect_ident();
      if (!at_kw("WITH")) throw SyntaxError{peek().loc, "expected WITH after IS " + r.source};
      next();
      while (true) {
        skip_newlines();
        if (at_kw("END")) {
          next();
          break;
        }
        if (peek().kind == TokKind::Eof || peek().kind == TokKind::Keyword) {
          missing_end("instantiation " + inc.name, cl.loc);
          break;
        }
        std::string from = expect_ident();
        expect_sym("→");
        std::string to = expect_ident();
        r.substitutions.emplace_back(std::move(from), std::move(to));
        accept_sym(",");
      }
      inc.instance = std::move(r);
    }
    cl.include = std::move(inc);
    end_line();
    return cl;
  }

  ClauseAst parse_synch() {
    ClauseAst cl;
    cl.kind = ClauseKind::Synch;
    cl.loc = next().loc;
    SynchGroupAst g;
    g.loc = cl.loc;
    g.name = expect_ident();
    while (true) {
      skip_newlines();
      if (at_kw("END")) {
        next();
        break;
      }
      if (peek().kind == TokKind::Eof || peek().kind == TokKind::Keyword) {
        missing_end("SYNCH " + g.name, cl.loc);
        break;
      }
      std::string m = expect_ident();
      expect_sym("•");
      std::string e = expect_ident();
      g.members.emplace_back(std::move(m), std::move(e));
    }
    cl.synch = std::move(g);
    end_line();
    return cl;
  }

  // ---- expressions --------------------------------------------------------

  std::vector<ExprPtr> parse_expr_list() {
    std::vector<ExprPtr> out{parse_expr()};
    while (accept_sym(",")) out.push_back(parse_expr());
    return out;
  }

  ExprPtr parse_expr() { return parse_implies(); }

  ExprPtr parse_implies() {
    ExprPtr l = parse_or();
    if (at_sym("⇒")) {
      const SourceLoc loc = next().loc;
      return make_binary(BinOp::Implies, l, parse_implies(), loc);
    }
    return l;
  }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    while (at_sym("∨")) {
      const SourceLoc loc = next().loc;
      l = make_binary(BinOp::Or, l, parse_and(), loc);
    }
    return l;
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_not();
    while (at_sym("∧")) {
      const SourceLoc loc = next().loc;
      l = make_binary(BinOp::And, l, parse_not(), loc);
    }
    return l;
  }

  ExprPtr parse_not() {
    if (at_sym("¬")) {
      const SourceLoc loc = next().loc;
      return make_unary(UnOp::Not, parse_not(), loc);
    }
    return parse_relation();
  }

  // Chains such as `0 < t < δ` read as `0 < t ∧ t < δ`.
  ExprPtr parse_relation() {
    ExprPtr first = parse_maplet();
    BinOp op;
    if (peek().kind != TokKind::Sym || !is_relop(peek().text, op)) return first;
    ExprPtr result;
    ExprPtr lhs = first;
    while (peek().kind == TokKind::Sym && is_relop(peek().text, op)) {
      const SourceLoc loc = next().loc;
      ExprPtr rhs = parse_maplet();
      ExprPtr link = make_binary(op, lhs, rhs, loc);
      result = result ? make_binary(BinOp::And, result, link, loc) : link;
      lhs = rhs;
    }
    return result;
  }

  ExprPtr parse_maplet() {
    ExprPtr l = parse_additive();
    while (at_sym("↦")) {
      const SourceLoc loc = next().loc;
      l = make_binary(BinOp::Maplet, l, parse_additive(), loc);
    }
    return l;
  }

  ExprPtr parse_additive() {
    ExprPtr l = parse_mult();
    while (true) {
      BinOp op;
      if (at_sym("+")) op = BinOp::Add;
      else if (at_sym("−")) op = BinOp::Sub;
      else if (at_sym("∪")) op = BinOp::Union;
      else if (at_sym("∩")) op = BinOp::Inter;
      else return l;
      const SourceLoc loc = next().loc;
      l = make_binary(op, l, parse_mult(), loc);
    }
  }

  ExprPtr parse_mult() {
    ExprPtr l = parse_unary();
    while (true) {
      BinOp op;
      if (at_sym("×")) op = BinOp::Mul;
      else if (at_sym("/")) op = BinOp::Div;
      else return l;
      const SourceLoc loc = next().loc;
      l = make_binary(op, l, parse_unary(), loc);
    }
  }

  ExprPtr parse_unary() {
    if (at_sym("−")) {
      const SourceLoc loc = next().loc;
      return make_unary(UnOp::Neg, parse_unary(), loc);
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (at_sym("[")) {
      const SourceLoc loc = next().loc;
      ExprPtr idx = parse_expr();
      expect_sym("]");
      e = make_index(e, idx, loc);
    }
    return e;
  }

  std::vector<ExprPtr> parse_until(const char* closer) {
    std::vector<ExprPtr> items;
    if (accept_sym(closer)) return items;
    items = parse_expr_list();
    expect_sym(closer);
    return items;
  }

  ExprPtr parse_primary() {
    const Token t = peek();
    switch (t.kind) {
      case TokKind::Number: {
        next();
        ExprPtr num = make_number(t.number, t.text, t.loc);
        // `2δ` is read as `2 × δ`.
        if (peek().kind == TokKind::Ident && peek().begin == t.end) {
          const Token id = next();
          return make_binary(BinOp::Mul, num, make_ident(id.text, id.loc), t.loc);
        }
        return num;
      }
      case TokKind::Ident: {
        next();
        if (t.text == "TRUE") return make_bool(true, t.loc);
        if (t.text == "FALSE") return make_bool(false, t.loc);
        if (t.text == "BOOL") return make_type("BOOL", t.loc);
        if (at_sym("(")) {
          next();
          return make_call(t.text, parse_until(")"), t.loc);
        }
        return make_ident(t.text, t.loc);
      }
      case TokKind::Sym: {
        const std::string& s = t.text;
        if (s == "(") {
          next();
          ExprPtr e = parse_expr();
          expect_sym(")");
          return e;
        }
        if (s == "{") {
          next();
          auto items = parse_until("}");
          if (items.empty()) return make_empty(t.loc);
          return make_set(std::move(items), t.loc);
        }
        if (s == "⟨") {
          next();
          return make_seq(parse_until("⟩"), t.loc);
        }
        if (s == "[") {
          next();
          ExprPtr lo = parse_expr();
          expect_sym("…");
          ExprPtr hi = parse_expr();
          expect_sym("]");
          return make_interval(lo, hi, t.loc);
        }
        if (s == "ℝ") { next(); return make_type("REAL", t.loc); }
        if (s == "ℕ") { next(); return make_type("NAT", t.loc); }
        if (s == "ℤ") { next(); return make_type("INT", t.loc); }
        if (s == "∅") { next(); return make_empty(t.loc); }
        if (s == "ℙ") {
          next();
          expect_sym("(");
          ExprPtr arg = parse_expr();
          expect_sym(")");
          return make_call("POW", {arg}, t.loc);
        }
        if (s == "⋃") {
          next();
          expect_sym("(");
          std::string var = expect_ident();
          expect_sym("•");
          ExprPtr range = parse_expr();
          expect_sym("|");
          ExprPtr body = parse_expr();
          expect_sym(")");
          return make_qunion(std::move(var), range, body, t.loc);
        }
        break;
      }
      default:
        break;
    }
    throw SyntaxError{t.loc, "unexpected '" + describe(t) + "' in expression"};
  }
};

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  ok = static_cast<bool>(in) || in.eof();
  return ss.str();
}

}  // namespace

ParseResult parse_unit(SourceUnit& src) {
  ParseResult r;
  auto toks = detail::lex(src.path, src.content, r.diagnostics);
  Parser p(std::move(toks), r.diagnostics);
  src.spans.clear();
  r.constructs = p.parse_file(src.spans);
  return r;
}

ExprPtr parse_expression(const std::string& text, Diagnostics* diags) {
  Diagnostics local;
  Diagnostics& d = diags ? *diags : local;
  const std::size_t before = d.size();
  auto toks = detail::lex("<expr>", text, d);
  Parser p(std::move(toks), d);
  ExprPtr e = p.parse_whole_expression();
  for (std::size_t k = before; k < d.size(); ++k)
    if (d[k].severity == Severity::Error) return nullptr;
  return e;
}

std::vector<std::string> collect_source_files(const std::vector<std::string>& paths,
                                              Diagnostics& diags) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(p, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".heb")
          found.push_back(entry.path().string());
      if (ec) diags.push_back(make_error("io-error", "cannot list directory: " + ec.message(), {p, 0, 0}));
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      diags.push_back(make_error("io-error", "no such file or directory", {p, 0, 0}));
    }
  }
  return files;
}

ParseResult parse_project_dir(const std::vector<std::string>& paths) {
  ParseResult r;
  const auto files = collect_source_files(paths, r.diagnostics);
  std::map<std::string, SourceLoc> seen;
  for (const auto& f : files) {
    bool ok = true;
    SourceUnit unit{f, read_file(f, ok), {}};
    if (!ok) {
      r.diagnostics.push_back(make_error("io-error", "cannot read file", {f, 0, 0}));
      continue;
    }
    ParseResult one = parse_unit(unit);
    r.diagnostics.insert(r.diagnostics.end(), one.diagnostics.begin(), one.diagnostics.end());
    for (auto& c : one.constructs) {
      auto [it, inserted] = seen.emplace(c.name, c.loc);
      if (!inserted) {
        r.diagnostics.push_back(make_error(
            "duplicate-name",
            "construct " + c.name + " is already defined at " + it->second.path + ":" +
                std::to_string(it->second.line),
            c.loc));
        continue;
      }
      r.constructs.push_back(std::move(c));
    }
  }
  if (r.constructs.empty() && !has_errors(r.diagnostics))
    r.diagnostics.push_back(make_warning("no-constructs", "no constructs found",
                                         {paths.empty() ? std::string() : paths.front(), 0, 0}));
  return r;
}

}  // namespace heb
