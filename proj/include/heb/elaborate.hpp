#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heb/ast.hpp"
#include "heb/diagnostics.hpp"
#include "heb/eval.hpp"

namespace heb {

enum class VarKind { Mode, Pliant, Clock, Time };

// Resolved names: machine locals are "Machine.var", interface variables and
// constants keep their declared spelling, enumeration literals become
// "SET.LIT".  After elaboration every identifier in every expression is one
// of these, a carrier set name, the time variable, or an ANY parameter.
struct VarDecl {
  std::string name;       // resolved
  std::string declared;   // spelling inside its construct
  std::string owner;      // machine or interface name
  VarKind kind = VarKind::Mode;
  ExprPtr type;           // resolved right-hand side of the typing invariant
};

struct Assignment {
  std::string target;  // resolved
  ExprPtr value;
  SourceLoc loc;
};

struct ElabEvent {
  std::string name;
  std::string machine;
  EventStatus status = EventStatus::Ordinary;
  std::vector<ParamAst> params;
  std::vector<ExprPtr> guard;      // resolved conjuncts
  std::vector<ExprPtr> initGuard;
  std::vector<Assignment> assigns;
  std::vector<Assignment> odes;          // target's derivative
  std::vector<Assignment> solveAssigns;  // algebraic pliant updates
  bool complyInvariants = false;
  std::vector<ExprPtr> comply;
  std::optional<std::string> synchGroup;
  bool implicit = false;  // added by auto-plitrue
  SourceLoc loc;

  ExprPtr guard_expr() const { return conjoin(guard); }
  bool is_mode() const { return status != EventStatus::Pliant; }
};

struct ElabMachine {
  std::string name;
  std::vector<VarDecl> localVars;
  std::vector<std::string> sees;
  std::vector<std::string> connectedInterfaces;
  std::vector<std::string> readInterfaces;
  std::vector<std::string> clocks;
  std::vector<Assignment> initialisation;
  std::vector<ElabEvent> events;  // INITIALISATION excluded
  std::vector<ExprPtr> localInvariants;  // non-typing, resolved

  const ElabEvent* find_event(const std::string& n) const;
};

struct TypeIIInvariant {
  ExprPtr local;    // U(u)
  std::string remote;
  ExprPtr remotePred;  // V(v)
  ExprPtr whole;
};

struct ElabInterface {
  std::string name;
  std::vector<VarDecl> vars;
  std::vector<std::string> sees;
  std::vector<std::string> reads;
  std::vector<std::string> refers;
  std::vector<ExprPtr> localInvariants;
  std::vector<TypeIIInvariant> typeII;
  std::vector<Assignment> initialisation;
};

struct ElabContext {
  std::string name;
  std::vector<std::string> sets;
  std::vector<std::string> constants;  // non-literal constants
  std::map<std::string, std::vector<std::string>> literals;  // set -> literals
  std::vector<ExprPtr> axioms;
  std::vector<ExprPtr> theorems;
};

struct GuardedPredicate {
  ExprPtr guard;  // true when the predicate is unconditional
  ExprPtr body;
  ExprPtr whole;
  std::string source;  // construct name
  int index = 0;       // position within its clause
};

struct SynchGroup {
  std::string name;
  std::vector<std::pair<std::string, std::string>> members;  // (machine, event)
  SourceLoc loc;
};

struct ElaboratedProject {
  std::string name;
  std::vector<ElabMachine> machines;  // declaration order
  std::vector<ElabInterface> interfaces;
  std::vector<ElabContext> contexts;
  std::vector<SynchGroup> synchGroups;
  std::vector<GuardedPredicate> globalInvariants;
  std::string timeVariable = "t";
  Valuation constants;  // context constants, carrier sets and literals

  const ElabMachine* find_machine(const std::string& n) const;
  const ElabInterface* find_interface(const std::string& n) const;
  const SynchGroup* find_group(const std::string& n) const;
  const VarDecl* find_var(const std::string& resolved) const;
  std::vector<const VarDecl*> all_vars() const;
  // Interfaces a machine may read (connected or READS).
  std::vector<const ElabInterface*> visible_interfaces(const ElabMachine& m) const;
};

struct ElaborateOptions {
  bool autoPliTrue = false;
};

// Applies an IS ... WITH renaming.  Diagnostics: renaming-collision,
// renaming-unknown-source.
ConstructAst instantiate(const ConstructAst& generic, const std::string& instanceName,
                         const RenamingAst& renaming, Diagnostics& diags, const SourceLoc& at = {});

struct ElaborationResult {
  ElaboratedProject project;
  Diagnostics diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

ElaborationResult elaborate(const std::vector<ConstructAst>& constructs, const ElaborateOptions& opt = {});

// Coverage warnings: mode events that leave declared targets unassigned are
// not flagged (frame rule), but pliant events that neither SOLVE nor COMPLY
// are, as are mode-event assignments to undeclared targets.
Diagnostics feasibility_scan(const ElaboratedProject& p);

// Pliant variables a pliant event drives through its SOLVE clause.
std::vector<std::string> driven_variables(const ElabEvent& e);

}  // namespace heb
