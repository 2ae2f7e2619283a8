#include <map>
#include <set>

#include "heb/elaborate.hpp"
#include "rewrite.hpp"

namespace heb {

namespace {

void collect_expr(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Ident || e->kind == ExprKind::Call || e->kind == ExprKind::QUnion)
    out.insert(e->text);
  for (const auto& a : e->args) collect_expr(a, out);
}

void collect_event(const EventAst& ev, std::set<std::string>& out) {
  out.insert(ev.name);
  for (const auto& p : ev.params) out.insert(p.name);
  for (const auto& g : ev.guard) collect_expr(g, out);
  for (const auto& g : ev.initGuard) collect_expr(g, out);
  auto assigns = [&](const std::vector<AssignAst>& xs) {
    for (const auto& a : xs) {
      out.insert(a.target);
      collect_expr(a.value, out);
      collect_expr(a.becomesSuchThat, out);
    }
  };
  assigns(ev.body.assignments);
  assigns(ev.body.solveAssigns);
  for (const auto& o : ev.body.odes) {
    out.insert(o.var);
    collect_expr(o.rhs, out);
  }
  if (ev.body.comply)
    for (const auto& p : ev.body.comply->preds) collect_expr(p, out);
}

// Every identifier spelled anywhere in the construct except its own name.
std::set<std::string> occurrences(const ConstructAst& c) {
  std::set<std::string> out;
  for (const auto& cl : c.clauses) {
    out.insert(cl.names.begin(), cl.names.end());
    for (const auto& p : cl.preds) collect_expr(p, out);
    for (const auto& a : cl.assigns) {
      out.insert(a.target);
      collect_expr(a.value, out);
    }
    for (const auto& ev : cl.events) collect_event(ev, out);
    if (cl.include) out.insert(cl.include->name);
    if (cl.synch)
      for (const auto& [m, e] : cl.synch->members) {
        out.insert(m);
        out.insert(e);
      }
  }
  return out;
}

}  // namespace

ConstructAst instantiate(const ConstructAst& generic, const std::string& instanceName,
                         const RenamingAst& renaming, Diagnostics& diags, const SourceLoc& at) {
  const auto used = occurrences(generic);
  std::map<std::string, std::string> subst;
  std::map<std::string, std::string> targetOf;
  bool ok = true;
  for (const auto& [from, to] : renaming.substitutions) {
    if (!used.count(from)) {
      diags.push_back(make_error(at, "renaming-unknown-source",
                                 from + " does not occur in " + generic.name));
      ok = false;
      continue;
    }
    if (auto it = targetOf.find(to); it != targetOf.end() && it->second != from) {
      diags.push_back(make_error(at, "renaming-collision",
                                 it->second + " and " + from + " are both renamed to " + to));
      ok = false;
      continue;
    }
    targetOf[to] = from;
    subst[from] = to;
  }
  for (const auto& [to, from] : targetOf) {
    if (used.count(to) && !subst.count(to)) {
      diags.push_back(make_error(at, "renaming-collision",
                                 "renaming " + from + " to " + to + " captures an existing identifier of " +
                                     generic.name));
      ok = false;
    }
  }
  ConstructAst out = generic;
  out.name = instanceName;
  if (!ok) return out;

  auto rn = [&](const std::string& s) {
    auto it = subst.find(s);
    return it == subst.end() ? s : it->second;
  };
  auto rx = [&](const ExprPtr& e) { return detail::rename_all(e, rn); };
  for (auto& cl : out.clauses) {
    for (auto& n : cl.names) n = rn(n);
    for (auto& p : cl.preds) p = rx(p);
    for (auto& a : cl.assigns) {
      a.target = rn(a.target);
      a.value = rx(a.value);
      a.becomesSuchThat = rx(a.becomesSuchThat);
    }
    for (auto& ev : cl.events) {
      ev.name = rn(ev.name);
      for (auto& p : ev.params) p.name = rn(p.name);
      for (auto& g : ev.guard) g = rx(g);
      for (auto& g : ev.initGuard) g = rx(g);
      for (auto* xs : {&ev.body.assignments, &ev.body.solveAssigns})
        for (auto& a : *xs) {
          a.target = rn(a.target);
          a.value = rx(a.value);
          a.becomesSuchThat = rx(a.becomesSuchThat);
        }
      for (auto& o : ev.body.odes) {
        o.var = rn(o.var);
        o.rhs = rx(o.rhs);
      }
      if (ev.body.comply)
        for (auto& p : ev.body.comply->preds) p = rx(p);
    }
  }
  return out;
}

std::vector<std::string> driven_variables(const ElabEvent& e) {
  std::vector<std::string> out;
  for (const auto& o : e.odes) out.push_back(o.target);
  for (const auto& a : e.solveAssigns) out.push_back(a.target);
  return out;
}

Diagnostics feasibility_scan(const ElaboratedProject& p) {
  Diagnostics out;
  for (const auto& m : p.machines) {
    for (const auto& e : m.events) {
      if (e.is_mode()) {
        std::set<std::string> assigned;
        for (const auto& a : e.assigns) assigned.insert(a.target);
        for (const auto& prm : e.params)
          if (prm.dir == ParamDir::Output && !assigned.count(prm.name))
            out.push_back(make_warning(e.loc, "feasibility-gap",
                                       m.name + "." + e.name + " never assigns output " + prm.name + "!"));
        continue;
      }
      if (!e.complyInvariants && e.comply.empty() && e.odes.empty() && e.solveAssigns.empty())
        out.push_back(make_warning(e.loc, "feasibility-gap",
                                   m.name + "." + e.name + " has neither SOLVE nor COMPLY"));
      for (const auto& v : driven_variables(e)) {
        const VarDecl* d = p.find_var(v);
        if (!d || d->kind != VarKind::Pliant)
          out.push_back(make_warning(e.loc, "feasibility-gap",
                                     m.name + "." + e.name + " drives " + v + ", which is not pliant"));
      }
    }
  }
  return out;
}

}  // namespace heb
