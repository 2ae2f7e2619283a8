#include "heb/elaborate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rewrite.hpp"

namespace heb {

const ElabEvent* ElabMachine::find_event(const std::string& n) const {
  for (const auto& e : events)
    if (e.name == n) return &e;
  return nullptr;
}

const ElabMachine* ElaboratedProject::find_machine(const std::string& n) const {
  for (const auto& m : machines)
    if (m.name == n) return &m;
  return nullptr;
}

const ElabInterface* ElaboratedProject::find_interface(const std::string& n) const {
  for (const auto& i : interfaces)
    if (i.name == n) return &i;
  return nullptr;
}

const SynchGroup* ElaboratedProject::find_group(const std::string& n) const {
  for (const auto& g : synchGroups)
    if (g.name == n) return &g;
  return nullptr;
}

const VarDecl* ElaboratedProject::find_var(const std::string& resolved) const {
  for (const auto& m : machines)
    for (const auto& v : m.localVars)
      if (v.name == resolved) return &v;
  for (const auto& i : interfaces)
    for (const auto& v : i.vars)
      if (v.name == resolved) return &v;
  return nullptr;
}

std::vector<const VarDecl*> ElaboratedProject::all_vars() const {
  std::vector<const VarDecl*> out;
  for (const auto& i : interfaces)
    for (const auto& v : i.vars) out.push_back(&v);
  for (const auto& m : machines)
    for (const auto& v : m.localVars) out.push_back(&v);
  return out;
}

std::vector<const ElabInterface*> ElaboratedProject::visible_interfaces(const ElabMachine& m) const {
  std::vector<const ElabInterface*> out;
  for (const auto* names : {&m.connectedInterfaces, &m.readInterfaces})
    for (const auto& n : *names)
      if (const auto* i = find_interface(n)) out.push_back(i);
  return out;
}

namespace {

using detail::resolve_free;

bool typing_shape(const ExprPtr& p, std::string& var, ExprPtr& type) {
  if (p->kind != ExprKind::Binary || (p->binop != BinOp::Colon && p->binop != BinOp::In)) return false;
  if (p->args[0]->kind != ExprKind::Ident) return false;
  var = p->args[0]->text;
  type = p->args[1];
  return true;
}

// Names visible from one construct, mapped to their resolved spelling.
struct NameTable {
  std::map<std::string, std::string> names;
  void add(const std::string& declared, const std::string& resolved) { names[declared] = resolved; }
  const std::string* find(const std::string& n) const {
    auto it = names.find(n);
    return it == names.end() ? nullptr : &it->second;
  }
};

struct Builder {
  ElaborateOptions opt;
  Diagnostics diags;
  ElaboratedProject proj;

  std::vector<ConstructAst> selected;  // constructs taking part, instances expanded
  std::vector<SynchGroupAst> synchAsts;
  const ConstructAst* globAst = nullptr;

  std::map<std::string, std::string> constantOwner;  // constant or set -> context
  std::map<std::string, std::map<std::string, std::string>> contextLiterals;  // ctx -> lit -> S.L
  std::map<std::string, std::string> varOwner;  // resolved var -> construct

  void error(const SourceLoc& loc, const std::string& code, const std::string& msg) {
    diags.push_back(make_error(loc, code, msg));
  }
  void warning(const SourceLoc& loc, const std::string& code, const std::string& msg) {
    diags.push_back(make_warning(loc, code, msg));
  }

  // ---- selection --------------------------------------------------------

  void select(const std::vector<ConstructAst>& constructs) {
    std::map<std::string, const ConstructAst*> pool;
    const ConstructAst* project = nullptr;
    for (const auto& c : constructs) {
      pool.emplace(c.name, &c);
      if (c.kind == ConstructKind::Project && !project) project = &c;
    }
    if (!project) {
      for (const auto& c : constructs) {
        if (c.kind == ConstructKind::GlobInvs) globAst = &c;
        selected.push_back(c);
      }
      proj.name = constructs.empty() ? "" : constructs.front().name;
      return;
    }
    proj.name = project->name;
    std::set<std::string> taken;
    for (const auto& cl : project->clauses) {
      if (cl.kind == ClauseKind::Synch && cl.synch) {
        synchAsts.push_back(*cl.synch);
        continue;
      }
      if (cl.kind != ClauseKind::Include || !cl.include) continue;
      const auto& inc = *cl.include;
      const std::string source = inc.instance ? inc.instance->source : inc.name;
      auto it = pool.find(source);
      if (it == pool.end()) {
        error(cl.loc, "unresolved-reference", std::string(construct_keyword(inc.kind)) + " " + source +
                                                  " is listed in " + project->name + " but not defined");
        continue;
      }
      if (it->second->kind != inc.kind) {
        error(cl.loc, "unresolved-reference", source + " is a " + construct_keyword(it->second->kind) +
                                                  ", not a " + construct_keyword(inc.kind));
        continue;
      }
      if (!taken.insert(inc.name).second) {
        error(cl.loc, "duplicate-name", inc.name + " is listed twice in " + project->name);
        continue;
      }
      if (inc.instance) {
        selected.push_back(instantiate(*it->second, inc.name, *inc.instance, diags, cl.loc));
        selected.back().loc = cl.loc;
      } else {
        selected.push_back(*it->second);
      }
    }
    for (const auto& c : selected)
      if (c.kind == ConstructKind::GlobInvs) globAst = &c;
  }

  // ---- contexts ---------------------------------------------------------

  void contexts() {
    for (const auto& c : selected) {
      if (c.kind != ConstructKind::Context) continue;
      ElabContext ctx;
      ctx.name = c.name;
      ctx.sets = c.names_of(ClauseKind::Sets);
      const auto declared = c.names_of(ClauseKind::Constants);
      std::set<std::string> literalNames;
      for (const auto* cl : c.clauses_of(ClauseKind::Axioms)) {
        for (const auto& ax : cl->preds) {
          // `S = {a, b}` enumerates a carrier set just like a partition into singletons.
          if (ax->kind == ExprKind::Binary && ax->binop == BinOp::Eq && ax->args[0]->kind == ExprKind::Ident &&
              ax->args[1]->kind == ExprKind::SetExt &&
              std::find(ctx.sets.begin(), ctx.sets.end(), ax->args[0]->text) != ctx.sets.end()) {
            const std::string& set = ax->args[0]->text;
            for (const auto& el : ax->args[1]->args) {
              if (el->kind != ExprKind::Ident ||
                  std::find(declared.begin(), declared.end(), el->text) == declared.end())
                continue;
              ctx.literals[set].push_back(el->text);
              literalNames.insert(el->text);
              contextLiterals[c.name][el->text] = set + "." + el->text;
            }
            continue;
          }
          if (ax->kind != ExprKind::Call || ax->text != "partition" || ax->args.empty()) continue;
          const auto& s = ax->args[0];
          if (s->kind != ExprKind::Ident ||
              std::find(ctx.sets.begin(), ctx.sets.end(), s->text) == ctx.sets.end())
            continue;
          for (std::size_t k = 1; k < ax->args.size(); ++k) {
            const auto& part = ax->args[k];
            if (part->kind != ExprKind::SetExt || part->args.size() != 1 ||
                part->args[0]->kind != ExprKind::Ident)
              continue;
            const std::string lit = part->args[0]->text;
            ctx.literals[s->text].push_back(lit);
            literalNames.insert(lit);
            contextLiterals[c.name][lit] = s->text + "." + lit;
          }
        }
      }
      for (const auto& n : declared)
        if (!literalNames.count(n)) ctx.constants.push_back(n);
      for (const auto* names : {&ctx.constants, &ctx.sets}) {
        for (const auto& n : *names) {
          auto [it, fresh] = constantOwner.emplace(n, c.name);
          if (!fresh)
            error(c.loc, "duplicate-variable", n + " is declared in both " + it->second + " and " + c.name);
        }
      }
      for (const auto& s : ctx.sets) {
        std::vector<Value> members;
        for (const auto& lit : ctx.literals[s]) {
          members.push_back(Value::enum_lit(s, lit));
          proj.constants.set(s + "." + lit, Value::enum_lit(s, lit));
        }
        proj.constants.set(s, Value::set(std::move(members)));
      }
      proj.contexts.push_back(std::move(ctx));
    }
    // Axioms may mention constants of any project context, so resolution
    // and valuation run over the whole pool.
    for (auto& ctx : proj.contexts) {
      const ConstructAst& c = construct(ctx.name);
      auto resolver = [&](const std::string& n, const SourceLoc& loc, bool call) -> std::string {
        if (call && is_builtin_name(n)) return n;
        if (auto it = contextLiterals[ctx.name].find(n); it != contextLiterals[ctx.name].end()) return it->second;
        if (constantOwner.count(n)) return n;
        if (auto lit = unique_literal(n)) return *lit;
        error(loc, call ? "unknown-builtin" : "unknown-identifier",
              (call ? "unknown function " : "unknown identifier ") + n + " in " + ctx.name);
        return n;
      };
      for (const auto* cl : c.clauses_of(ClauseKind::Axioms))
        for (const auto& ax : cl->preds) ctx.axioms.push_back(resolve_free(ax, resolver));
      for (const auto* cl : c.clauses_of(ClauseKind::Theorems))
        for (const auto& th : cl->preds) ctx.theorems.push_back(resolve_free(th, resolver));
    }
    solve_constants();
  }

  std::optional<std::string> unique_literal(const std::string& n) const {
    std::optional<std::string> found;
    for (const auto& [ctx, lits] : contextLiterals) {
      auto it = lits.find(n);
      if (it == lits.end()) continue;
      if (found && *found != it->second) return std::nullopt;
      found = it->second;
    }
    return found;
  }

  const ConstructAst& construct(const std::string& name) const {
    for (const auto& c : selected)
      if (c.name == name) return c;
    static const ConstructAst none;
    return none;
  }

  void solve_constants() {
    std::vector<std::pair<std::string, ExprPtr>> defs;
    for (const auto& ctx : proj.contexts)
      for (const auto& ax : ctx.axioms)
        for (const auto& part : conjuncts(ax))
          if (part->kind == ExprKind::Binary && part->binop == BinOp::Eq &&
              part->args[0]->kind == ExprKind::Ident && constantOwner.count(part->args[0]->text) &&
              !proj.constants.lookup(part->args[0]->text))
            defs.emplace_back(part->args[0]->text, part->args[1]);
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& [name, e] : defs) {
        if (proj.constants.lookup(name)) continue;
        if (auto v = try_eval(*e, proj.constants, {})) {
          proj.constants.set(name, *v);
          progress = true;
        }
      }
    }
    for (const auto& ctx : proj.contexts) {
      for (const auto& ax : ctx.axioms) {
        EvalError err("", "");
        auto v = try_eval(*ax, proj.constants, {}, &err);
        if (!v)
          error(ax->loc, "axiom-failure", "cannot evaluate axiom " + pretty_print(ax) + " of " + ctx.name + ": " +
                                              err.what());
        else if (v->kind() != ValueKind::Bool || !v->as_bool())
          error(ax->loc, "axiom-failure", "axiom " + pretty_print(ax) + " of " + ctx.name + " does not hold");
      }
      for (const auto& th : ctx.theorems) {
        EvalError err("", "");
        auto v = try_eval(*th, proj.constants, {}, &err);
        if (!v)
          error(th->loc, "theorem-failure", "cannot evaluate theorem " + pretty_print(th) + " of " + ctx.name +
                                                ": " + err.what());
        else if (v->kind() != ValueKind::Bool || !v->as_bool())
          error(th->loc, "theorem-failure", "theorem " + pretty_print(th) + " of " + ctx.name + " does not hold");
      }
    }
  }

  // Constants, sets and literals of the listed contexts.
  void add_context_names(NameTable& t, const std::vector<std::string>& sees, const SourceLoc& loc,
                         const std::string& who) {
    for (const auto& s : sees) {
      const ElabContext* ctx = nullptr;
      for (const auto& c : proj.contexts)
        if (c.name == s) ctx = &c;
      if (!ctx) {
        error(loc, "unresolved-reference", who + " SEES " + s + ", which is not a project context");
        continue;
      }
      for (const auto& n : ctx->constants) t.add(n, n);
      for (const auto& n : ctx->sets) t.add(n, n);
      for (const auto& [lit, res] : contextLiterals[s]) t.add(lit, res);
    }
  }

  std::function<std::string(const std::string&, const SourceLoc&, bool)> resolver_for(const NameTable& t,
                                                                                      const std::string& who) {
    return [this, &t, who](const std::string& n, const SourceLoc& loc, bool call) -> std::string {
      if (call && is_builtin_name(n)) return n;
      if (const auto* r = t.find(n)) return *r;
      error(loc, call ? "unknown-builtin" : "unknown-identifier",
            (call ? "unknown function " : "unknown identifier ") + n + " in " + who);
      return n;
    };
  }

  // ---- time -------------------------------------------------------------

  void time_variable() {
    std::optional<std::string> name;
    for (const auto& c : selected) {
      for (const auto* cl : c.clauses_of(ClauseKind::Time)) {
        for (const auto& n : cl->names) {
          if (!name) name = n;
          else if (*name != n)
            error(cl->loc, "time-redeclared",
                  c.name + " declares TIME " + n + " but the project clock is already " + *name);
        }
      }
    }
    if (name) proj.timeVariable = *name;
  }

  // ---- declarations -----------------------------------------------------

  std::vector<VarDecl> declare(const ConstructAst& c, bool machine) {
    std::vector<VarDecl> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& n, VarKind k, const SourceLoc& loc) {
      if (!seen.insert(n).second) {
        error(loc, "duplicate-variable", n + " is declared twice in " + c.name);
        return;
      }
      if (n == proj.timeVariable) {
        error(loc, "time-redeclared", c.name + " declares the time variable " + n + " as a variable");
        return;
      }
      VarDecl d;
      d.declared = n;
      d.owner = c.name;
      d.kind = k;
      d.name = machine ? c.name + "." + n : n;
      out.push_back(d);
    };
    for (const auto* cl : c.clauses_of(ClauseKind::Variables))
      for (const auto& n : cl->names) add(n, VarKind::Mode, cl->loc);
    for (const auto* cl : c.clauses_of(ClauseKind::Pliant))
      for (const auto& n : cl->names) add(n, VarKind::Pliant, cl->loc);
    for (const auto* cl : c.clauses_of(ClauseKind::Clock))
      for (const auto& n : cl->names) add(n, VarKind::Clock, cl->loc);
    return out;
  }

  void interfaces_declare() {
    std::map<std::string, std::string> owner;
    for (const auto& c : selected) {
      if (c.kind != ConstructKind::Interface) continue;
      ElabInterface itf;
      itf.name = c.name;
      itf.sees = c.names_of(ClauseKind::Sees);
      itf.reads = c.names_of(ClauseKind::Reads);
      itf.refers = c.names_of(ClauseKind::Refers);
      itf.vars = declare(c, false);
      for (const auto& v : itf.vars) {
        if (auto [it, fresh] = owner.emplace(v.name, c.name); !fresh)
          error(c.loc, "duplicate-variable", v.name + " is declared in interfaces " + it->second + " and " + c.name);
        else if (constantOwner.count(v.name))
          error(c.loc, "duplicate-variable", v.name + " is both a constant and a variable of " + c.name);
        varOwner[v.name] = c.name;
      }
      proj.interfaces.push_back(std::move(itf));
    }
  }

  NameTable interface_table(const ElabInterface& itf, const ConstructAst& c) {
    NameTable t;
    add_context_names(t, itf.sees, c.loc, itf.name);
    for (const auto& other : proj.interfaces)
      for (const auto& v : other.vars) t.add(v.declared, v.name);
    t.add(proj.timeVariable, proj.timeVariable);
    return t;
  }

  // Splits invariants into typing (consumed into `vars`) and the rest.
  std::vector<ExprPtr> take_typing(const ConstructAst& c, std::vector<VarDecl>& vars,
                                   const std::function<std::string(const std::string&, const SourceLoc&, bool)>& res) {
    std::vector<ExprPtr> rest;
    for (const auto* cl : c.clauses_of(ClauseKind::Invariants)) {
      for (const auto& inv : cl->preds) {
        std::string var;
        ExprPtr type;
        if (typing_shape(inv, var, type)) {
          auto it = std::find_if(vars.begin(), vars.end(), [&](const VarDecl& d) { return d.declared == var; });
          if (it != vars.end() && !it->type) {
            it->type = resolve_free(type, res);
            continue;
          }
        }
        rest.push_back(inv);
      }
    }
    for (auto& v : vars) {
      if (v.type) continue;
      if (v.kind == VarKind::Clock) {
        v.type = make_type("REAL");
        continue;
      }
      error(c.loc, "type-missing", v.declared + " in " + c.name + " has no typing invariant");
    }
    return rest;
  }

  void interfaces_body() {
    for (auto& itf : proj.interfaces) {
      const ConstructAst& c = construct(itf.name);
      for (const auto* names : {&itf.reads, &itf.refers})
        for (const auto& n : *names)
          if (!proj.find_interface(n))
            error(c.loc, "unresolved-reference", itf.name + " names " + n + ", which is not a project interface");
      NameTable t = interface_table(itf, c);
      auto res = resolver_for(t, itf.name);
      auto rest = take_typing(c, itf.vars, res);
      std::set<std::string> own;
      for (const auto& v : itf.vars) own.insert(v.name);
      for (const auto& raw : rest) {
        ExprPtr inv = resolve_free(raw, res);
        auto foreign = foreign_vars(inv, own);
        if (foreign.empty()) {
          itf.localInvariants.push_back(inv);
          continue;
        }
        type_two(itf, inv, own);
      }
      for (const auto* cl : c.clauses_of(ClauseKind::Initialisation)) {
        for (const auto& a : cl->assigns) {
          if (a.target == proj.timeVariable) continue;  // `t := 0` restates the global start
          if (!own.count(a.target)) {
            error(a.loc, "write-not-visible", itf.name + " initialises " + a.target + ", which it does not declare");
            continue;
          }
          if (!a.value) {
            error(a.loc, "nondeterministic-update", ":| initialisation of " + a.target + " cannot be executed");
            continue;
          }
          itf.initialisation.push_back({a.target, resolve_free(a.value, res), a.loc});
        }
      }
      check_initialised(itf.vars, itf.initialisation, c.loc, itf.name);
    }
  }

  void check_initialised(const std::vector<VarDecl>& vars, const std::vector<Assignment>& init, const SourceLoc& loc,
                         const std::string& who) {
    for (const auto& v : vars) {
      if (v.kind == VarKind::Clock) continue;
      bool found = std::any_of(init.begin(), init.end(), [&](const Assignment& a) { return a.target == v.name; });
      if (!found) error(loc, "uninitialised-variable", who + " never initialises " + v.declared);
    }
  }

  // Variables in `e` that are neither in `own` nor constants.
  std::set<std::string> foreign_vars(const ExprPtr& e, const std::set<std::string>& own) {
    std::set<std::string> out;
    for (const auto& n : free_identifiers(e)) {
      if (own.count(n) || n == proj.timeVariable || proj.constants.lookup(n) || constantOwner.count(n)) continue;
      out.insert(n);
    }
    return out;
  }

  void type_two(ElabInterface& itf, const ExprPtr& inv, const std::set<std::string>& own) {
    if (inv->kind != ExprKind::Binary || inv->binop != BinOp::Implies) {
      error(inv->loc, "tIi-nonlocal", "invariant " + pretty_print(inv) + " of " + itf.name +
                                          " mentions variables of other constructs");
      return;
    }
    const auto lhsForeign = foreign_vars(inv->args[0], own);
    std::set<std::string> owners;
    for (const auto& v : foreign_vars(inv->args[1], {})) {
      auto it = varOwner.find(v);
      owners.insert(it == varOwner.end() ? "?" : it->second);
    }
    owners.erase(itf.name);
    if (!lhsForeign.empty() || owners.size() != 1 || owners.count("?") ||
        !proj.find_interface(*owners.begin()) || !foreign_vars(inv->args[1], own).size()) {
      error(inv->loc, "tIIi-shape", "invariant " + pretty_print(inv) + " of " + itf.name +
                                        " must read U(u) => V(v) with u local and v from one other interface");
      return;
    }
    const std::string remote = *owners.begin();
    std::set<std::string> remoteVars;
    for (const auto& v : proj.find_interface(remote)->vars) remoteVars.insert(v.name);
    for (const auto& v : foreign_vars(inv->args[1], own))
      if (!remoteVars.count(v)) {
        error(inv->loc, "tIIi-shape", "consequent of " + pretty_print(inv) + " mixes interfaces");
        return;
      }
    if (std::find(itf.refers.begin(), itf.refers.end(), remote) == itf.refers.end())
      error(inv->loc, "tIIi-missing-refers", itf.name + " states a type II invariant about " + remote +
                                                 " without REFERS " + remote);
    const ElabInterface* r = proj.find_interface(remote);
    if (std::find(r->reads.begin(), r->reads.end(), itf.name) == r->reads.end())
      error(inv->loc, "tIIi-missing-reads", remote + " must READ " + itf.name +
                                                " to honour the type II invariant " + pretty_print(inv));
    itf.typeII.push_back({inv->args[0], remote, inv->args[1], inv});
  }

  // ---- machines ---------------------------------------------------------

  void machines() {
    for (const auto& c : selected) {
      if (c.kind != ConstructKind::Machine) continue;
      ElabMachine m;
      m.name = c.name;
      m.sees = c.names_of(ClauseKind::Sees);
      m.connectedInterfaces = c.names_of(ClauseKind::Connects);
      m.readInterfaces = c.names_of(ClauseKind::Reads);
      m.localVars = declare(c, true);
      for (auto& v : m.localVars) {
        varOwner[v.name] = c.name;
        if (v.kind == VarKind::Clock) m.clocks.push_back(v.name);
      }
      proj.machines.push_back(std::move(m));
    }
    for (auto& m : proj.machines) machine_body(m, construct(m.name));
  }

  void machine_body(ElabMachine& m, const ConstructAst& c) {
    NameTable t;
    add_context_names(t, m.sees, c.loc, m.name);
    std::set<std::string> writable, readOnly;
    for (const auto* names : {&m.connectedInterfaces, &m.readInterfaces}) {
      for (const auto& n : *names) {
        const ElabInterface* itf = proj.find_interface(n);
        if (!itf) {
          error(c.loc, "unresolved-reference", m.name + " names interface " + n + ", which is not in the project");
          continue;
        }
        for (const auto& v : itf->vars) {
          t.add(v.declared, v.name);
          (names == &m.connectedInterfaces ? writable : readOnly).insert(v.name);
        }
      }
    }
    for (const auto& v : writable) readOnly.erase(v);
    t.add(proj.timeVariable, proj.timeVariable);
    std::set<std::string> own;
    for (const auto& v : m.localVars) {
      if (const auto* prior = t.find(v.declared); prior && varOwner.count(*prior))
        error(c.loc, "duplicate-variable", m.name + " redeclares interface variable " + v.declared);
      t.add(v.declared, v.name);
      writable.insert(v.name);
      own.insert(v.name);
    }
    auto res = resolver_for(t, m.name);
    auto rest = take_typing(c, m.localVars, res);
    for (const auto& raw : rest) {
      ExprPtr inv = resolve_free(raw, res);
      if (foreign_vars(inv, own).empty()) {
        m.localInvariants.push_back(inv);
        continue;
      }
      if (inv->kind == ExprKind::Binary && inv->binop == BinOp::Implies)
        error(inv->loc, "tIIi-outside-interface",
              "type II invariant " + pretty_print(inv) + " may only be declared in an interface, not in " + m.name);
      else
        error(inv->loc, "tIi-nonlocal", "invariant " + pretty_print(inv) + " of " + m.name +
                                            " mentions variables outside the machine");
    }

    auto target = [&](const std::string& declared, const SourceLoc& loc, const std::string& ev) -> std::string {
      const std::string* r = t.find(declared);
      if (r && writable.count(*r)) return *r;
      if (r && readOnly.count(*r)) {
        error(loc, "write-via-reads", m.name + "." + ev + " writes " + declared +
                                          ", which it only READS");
      } else {
        error(loc, "write-not-visible", m.name + "." + ev + " writes " + declared +
                                            ", which is neither local nor in a connected interface");
      }
      return declared;
    };

    bool hasPliant = false;
    std::set<std::string> names;
    for (const auto* cl : c.clauses_of(ClauseKind::Events)) {
      for (const auto& ev : cl->events) {
        if (!names.insert(ev.name).second) {
          error(ev.loc, "duplicate-name", "event " + ev.name + " is declared twice in " + m.name);
          continue;
        }
        std::set<std::string> bound;
        for (const auto& p : ev.params) {
          bound.insert(p.name);
          if (t.find(p.name))
            error(ev.loc, "duplicate-variable", "parameter " + p.name + " of " + m.name + "." + ev.name +
                                                    " shadows a visible name");
        }
        auto rx = [&](const ExprPtr& e) { return resolve_free(e, res, bound); };
        ElabEvent out;
        out.name = ev.name;
        out.machine = m.name;
        out.status = ev.status;
        out.params = ev.params;
        out.loc = ev.loc;
        for (const auto& g : ev.guard)
          for (const auto& part : conjuncts(rx(g))) out.guard.push_back(part);
        for (const auto& g : ev.initGuard) out.initGuard.push_back(rx(g));
        for (const auto& a : ev.body.assignments) {
          if (!a.value) {
            error(a.loc, "nondeterministic-update", m.name + "." + ev.name + " uses :| on " + a.target +
                                                        ", which cannot be executed");
            continue;
          }
          // Output parameters are bound by the writer, not stored.
          if (bound.count(a.target)) {
            out.assigns.push_back({a.target, rx(a.value), a.loc});
            continue;
          }
          out.assigns.push_back({target(a.target, a.loc, ev.name), rx(a.value), a.loc});
        }
        for (const auto& o : ev.body.odes)
          out.odes.push_back({target(o.var, o.loc, ev.name), rx(o.rhs), o.loc});
        for (const auto& a : ev.body.solveAssigns) {
          if (!a.value) {
            error(a.loc, "nondeterministic-update", ":| inside SOLVE cannot be executed");
            continue;
          }
          out.solveAssigns.push_back({target(a.target, a.loc, ev.name), rx(a.value), a.loc});
        }
        if (ev.body.comply) {
          out.complyInvariants = ev.body.comply->invariants;
          for (const auto& p : ev.body.comply->preds) out.comply.push_back(rx(p));
        }
        if (ev.name == "INITIALISATION") {
          m.initialisation = out.assigns;
          continue;
        }
        if (ev.status == EventStatus::Pliant) hasPliant = true;
        m.events.push_back(std::move(out));
      }
    }
    for (const auto& e : m.events)
      for (const auto& o : e.odes)
        if (const VarDecl* d = find_any_var(o.target); d && d->kind != VarKind::Pliant)
          error(o.loc, "syntax-error", m.name + "." + e.name + " gives an ODE for mode variable " + d->declared);
    check_initialised(m.localVars, m.initialisation, c.loc, m.name);
    if (!hasPliant && opt.autoPliTrue) {
      ElabEvent pli;
      pli.name = "PliTrue";
      pli.machine = m.name;
      pli.status = EventStatus::Pliant;
      pli.complyInvariants = true;
      pli.implicit = true;
      pli.loc = c.loc;
      m.events.push_back(std::move(pli));
    }
  }

  const VarDecl* find_any_var(const std::string& n) const {
    for (const auto& m : proj.machines)
      for (const auto& v : m.localVars)
        if (v.name == n) return &v;
    for (const auto& i : proj.interfaces)
      for (const auto& v : i.vars)
        if (v.name == n) return &v;
    return nullptr;
  }

  // ---- global invariants ------------------------------------------------

  void global_invariants() {
    if (!globAst) return;
    const ConstructAst& c = *globAst;
    NameTable t;
    add_context_names(t, c.names_of(ClauseKind::Sees), c.loc, c.name);
    for (const auto& names : std::vector<std::vector<std::string>> {c.names_of(ClauseKind::Connects), c.names_of(ClauseKind::Reads)})
      for (const auto& n : names)
        if (!proj.find_interface(n))
          error(c.loc, "unresolved-reference", c.name + " names interface " + n + ", which is not in the project");
    for (const auto& itf : proj.interfaces)
      for (const auto& v : itf.vars) t.add(v.declared, v.name);
    std::map<std::string, int> count;
    for (const auto& m : proj.machines)
      for (const auto& v : m.localVars) ++count[v.declared];
    for (const auto& m : proj.machines)
      for (const auto& v : m.localVars)
        if (count[v.declared] == 1 && !t.find(v.declared)) t.add(v.declared, v.name);
    for (const auto& [n, owner] : constantOwner) t.add(n, n);
    t.add(proj.timeVariable, proj.timeVariable);
    auto res = resolver_for(t, c.name);
    int index = 0;
    for (const auto* cl : c.clauses_of(ClauseKind::Invariants)) {
      for (const auto& raw : cl->preds) {
        GuardedPredicate gp;
        gp.whole = resolve_free(raw, res);
        if (gp.whole->kind == ExprKind::Binary && gp.whole->binop == BinOp::Implies) {
          gp.guard = gp.whole->args[0];
          gp.body = gp.whole->args[1];
        } else {
          gp.guard = make_bool(true);
          gp.body = gp.whole;
        }
        gp.source = c.name;
        gp.index = index++;
        proj.globalInvariants.push_back(gp);
      }
    }
  }

  // ---- synchronisation ----------------------------------------------------

  void synch_groups() {
    std::map<std::pair<std::string, std::string>, std::string> memberOf;
    for (const auto& g : synchAsts) {
      SynchGroup out{g.name, g.members, g.loc};
      bool ok = true;
      std::set<std::string> machinesSeen;
      if (g.members.size() < 2) {
        error(g.loc, "synch-unknown-member", "SYNCH " + g.name + " needs at least two members");
        ok = false;
      }
      std::map<std::string, std::string> writer;
      for (const auto& [mn, en] : g.members) {
        const ElabMachine* m = proj.find_machine(mn);
        const ElabEvent* e = m ? m->find_event(en) : nullptr;
        if (!e) {
          error(g.loc, "synch-unknown-member", "SYNCH " + g.name + " names " + mn + "." + en +
                                                   ", which is not an event of a project machine");
          ok = false;
          continue;
        }
        if (!e->is_mode()) {
          error(g.loc, "synch-non-mode-member", "SYNCH " + g.name + " includes pliant event " + mn + "." + en);
          ok = false;
        }
        if (!machinesSeen.insert(mn).second) {
          error(g.loc, "synch-same-machine", "SYNCH " + g.name + " has two members in " + mn);
          ok = false;
        }
        if (auto [it, fresh] = memberOf.emplace(std::make_pair(mn, en), g.name); !fresh) {
          error(g.loc, "synch-unknown-member", mn + "." + en + " already belongs to SYNCH " + it->second);
          ok = false;
        }
        for (const auto& a : e->assigns) {
          if (std::any_of(e->params.begin(), e->params.end(), [&](const ParamAst& p) { return p.name == a.target; }))
            continue;
          if (auto [it, fresh] = writer.emplace(a.target, mn + "." + en); !fresh) {
            error(g.loc, "synch-write-conflict", "SYNCH " + g.name + ": " + it->second + " and " + mn + "." + en +
                                                     " both write " + a.target);
            ok = false;
          }
        }
      }
      if (!ok) continue;
      for (const auto& [mn, en] : g.members)
        for (auto& m : proj.machines)
          if (m.name == mn)
            for (auto& e : m.events)
              if (e.name == en) e.synchGroup = g.name;
      proj.synchGroups.push_back(std::move(out));
    }
  }

  // ---- pliant co-scheduling --------------------------------------------

  struct Constraint {
    bool positive = true;  // x in vals, or x not in vals
    std::set<std::string> vals;
  };

  bool literal_like(const ExprPtr& e) const {
    switch (e->kind) {
      case ExprKind::Number: case ExprKind::BoolLit: case ExprKind::EmptySet: return true;
      case ExprKind::SeqExt: return e->args.empty();
      case ExprKind::Ident: return proj.constants.lookup(e->text) != nullptr;
      default: return false;
    }
  }

  std::map<std::string, Constraint> constraints(const ElabEvent& e) const {
    std::map<std::string, Constraint> out;
    for (const auto& g : e.guard) {
      if (g->kind != ExprKind::Binary || g->args[0]->kind != ExprKind::Ident) continue;
      const std::string v = g->args[0]->text;
      const auto& rhs = g->args[1];
      if (g->binop == BinOp::Eq || g->binop == BinOp::Neq) {
        if (!literal_like(rhs)) continue;  // comparisons between variables say nothing by shape
        out[v] = {g->binop == BinOp::Eq, {pretty_print(rhs)}};
      } else if ((g->binop == BinOp::In || g->binop == BinOp::NotIn) && rhs->kind == ExprKind::SetExt) {
        Constraint c{g->binop == BinOp::In, {}};
        if (!std::all_of(rhs->args.begin(), rhs->args.end(), [&](const ExprPtr& a) { return literal_like(a); }))
          continue;
        for (const auto& a : rhs->args) c.vals.insert(pretty_print(a));
        out[v] = c;
      }
    }
    return out;
  }

  bool exclusive(const ElabEvent& a, const ElabEvent& b) {
    auto ca = constraints(a), cb = constraints(b);
    for (const auto& [v, x] : ca) {
      auto it = cb.find(v);
      if (it == cb.end()) continue;
      const Constraint& y = it->second;
      auto subset = [](const std::set<std::string>& p, const std::set<std::string>& q) {
        return std::includes(q.begin(), q.end(), p.begin(), p.end());
      };
      if (x.positive && y.positive) {
        if (std::none_of(x.vals.begin(), x.vals.end(), [&](const std::string& s) { return y.vals.count(s); }))
          return true;
      } else if (x.positive && !y.positive) {
        if (subset(x.vals, y.vals)) return true;
      } else if (!x.positive && y.positive) {
        if (subset(y.vals, x.vals)) return true;
      }
    }
    return false;
  }

  void coscheduling() {
    for (const auto& m : proj.machines) {
      std::vector<const ElabEvent*> pliant;
      for (const auto& e : m.events)
        if (!e.is_mode()) pliant.push_back(&e);
      for (std::size_t i = 0; i < pliant.size(); ++i)
        for (std::size_t j = i + 1; j < pliant.size(); ++j)
          if (!exclusive(*pliant[i], *pliant[j]))
            warning(pliant[j]->loc, "pliant-coscheduling",
                    m.name + ": pliant events " + pliant[i]->name + " and " + pliant[j]->name +
                        " are not syntactically exclusive");
    }
  }

  void run(const std::vector<ConstructAst>& constructs) {
    select(constructs);
    time_variable();
    contexts();
    interfaces_declare();
    interfaces_body();
    machines();
    global_invariants();
    synch_groups();
    coscheduling();
  }
};

}  // namespace

ElaborationResult elaborate(const std::vector<ConstructAst>& constructs, const ElaborateOptions& opt) {
  Builder b;
  b.opt = opt;
  b.run(constructs);
  return {std::move(b.proj), std::move(b.diags)};
}

}  // namespace heb
