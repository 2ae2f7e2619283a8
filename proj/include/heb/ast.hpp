#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace heb {

struct SourceLoc {
  std::string path;
  int line = 0;
  int column = 0;
};

// Exact decimal literal; converted to binary64 only when evaluated.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class ExprKind {
  Number,
  Ident,
  BoolLit,
  TypeName,   // ℝ ℕ ℤ BOOL
  EmptySet,
  Unary,
  Binary,
  SetExt,     // {a, b}
  SeqExt,     // ⟨a, b⟩
  Call,       // f(a, b)
  Index,      // e[i]
  Interval,   // [a … b]
  QUnion,     // ⋃(v • v ∈ S | body)
};

enum class UnOp { Not, Neg };

enum class BinOp {
  Implies, Or, And,
  Eq, Neq, Lt, Le, Gt, Ge, In, NotIn, Colon, Subset,
  Maplet,
  Add, Sub, Union, Inter,
  Mul, Div,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Number;
  Rational number{};
  std::string text;  // identifier / call name / number spelling / type name
  bool boolValue = false;
  UnOp unop = UnOp::Not;
  BinOp binop = BinOp::And;
  std::vector<ExprPtr> args;
  SourceLoc loc;  // not part of structural equality
};

ExprPtr make_number(Rational r, std::string spelling, SourceLoc loc = {});
ExprPtr make_ident(std::string name, SourceLoc loc = {});
ExprPtr make_bool(bool b, SourceLoc loc = {});
ExprPtr make_type(std::string name, SourceLoc loc = {});
ExprPtr make_empty(SourceLoc loc = {});
ExprPtr make_unary(UnOp op, ExprPtr a, SourceLoc loc = {});
ExprPtr make_binary(BinOp op, ExprPtr a, ExprPtr b, SourceLoc loc = {});
ExprPtr make_set(std::vector<ExprPtr> elems, SourceLoc loc = {});
ExprPtr make_seq(std::vector<ExprPtr> elems, SourceLoc loc = {});
ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourceLoc loc = {});
ExprPtr make_index(ExprPtr base, ExprPtr index, SourceLoc loc = {});
ExprPtr make_interval(ExprPtr lo, ExprPtr hi, SourceLoc loc = {});
ExprPtr make_qunion(std::string var, ExprPtr range, ExprPtr body, SourceLoc loc = {});

bool expr_equal(const Expr& a, const Expr& b);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Splits a top-level conjunction into its conjuncts.
std::vector<ExprPtr> conjuncts(const ExprPtr& e);
ExprPtr conjoin(const std::vector<ExprPtr>& parts);

enum class EventStatus { Ordinary, Pliant, Asynch };
enum class ParamDir { Input, Output, Local };

struct ParamAst {
  std::string name;
  ParamDir dir = ParamDir::Local;
  bool operator==(const ParamAst&) const = default;
};

// `x, y := e1, e2` is split into one entry per target.  `x :| P` keeps the
// predicate and no value.
struct AssignAst {
  std::string target;
  ExprPtr value;
  ExprPtr becomesSuchThat;
  SourceLoc loc;
};

struct OdeAst {
  std::string var;
  ExprPtr rhs;
  SourceLoc loc;
};

struct ComplyAst {
  bool invariants = false;  // COMPLY INVARIANTS
  std::vector<ExprPtr> preds;
};

struct EventBody {
  std::vector<AssignAst> assignments;
  std::vector<OdeAst> odes;
  std::vector<AssignAst> solveAssigns;  // `y := E` inside SOLVE
  std::optional<ComplyAst> comply;
  bool hasSolve = false;
};

struct EventAst {
  std::string name;
  EventStatus status = EventStatus::Ordinary;
  std::vector<ParamAst> params;
  std::vector<ExprPtr> guard;      // WHERE / WHEN conjuncts
  std::vector<ExprPtr> initGuard;  // INIT conjuncts (pliant)
  EventBody body;
  SourceLoc loc;
};

struct RenamingAst {
  std::string source;
  std::vector<std::pair<std::string, std::string>> substitutions;
};

struct SynchGroupAst {
  std::string name;
  std::vector<std::pair<std::string, std::string>> members;  // (machine, event)
  SourceLoc loc;
};

enum class ConstructKind { Project, Machine, Context, Interface, GlobInvs };

enum class ClauseKind {
  Sees, Connects, Reads, Refers, Time, Clock, Pliant, Variables,
  Invariants, Theorems, Sets, Constants, Axioms, Initialisation, Events,
  Include,  // project member: CONTEXT X [IS G WITH ... END]
  Synch,
};

struct IncludeAst {
  ConstructKind kind = ConstructKind::Machine;
  std::string name;
  std::optional<RenamingAst> instance;
};

struct ClauseAst {
  ClauseKind kind = ClauseKind::Sees;
  std::vector<std::string> names;
  std::vector<ExprPtr> preds;
  std::vector<AssignAst> assigns;
  std::vector<EventAst> events;
  std::optional<IncludeAst> include;
  std::optional<SynchGroupAst> synch;
  SourceLoc loc;
};

struct ConstructAst {
  ConstructKind kind = ConstructKind::Machine;
  std::string name;
  std::vector<ClauseAst> clauses;
  SourceLoc loc;

  // All clauses of one kind, in order.
  std::vector<const ClauseAst*> clauses_of(ClauseKind k) const;
  std::vector<std::string> names_of(ClauseKind k) const;
};

bool construct_equal(const ConstructAst& a, const ConstructAst& b);

const char* construct_keyword(ConstructKind k);
const char* clause_keyword(ClauseKind k);
const char* status_name(EventStatus s);

std::string pretty_print(const Expr& e);
std::string pretty_print(const ExprPtr& e);
std::string pretty_print(const ConstructAst& c);

// Identifiers occurring free in `e`, excluding `bound` and names of
// registered built-in functions.
std::set<std::string> free_identifiers(const ExprPtr& e, const std::set<std::string>& bound = {});

// Names recognised as built-in functions when they appear in call position.
bool is_builtin_name(const std::string& name);

}  // namespace heb
