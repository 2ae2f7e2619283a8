#include "heb/monitor.hpp"

namespace heb {

const char* phase_name(CheckPhase p) {
  switch (p) {
    case CheckPhase::Init: return "init";
    case CheckPhase::BeforeEvent: return "beforeModeEvent";
    case CheckPhase::AfterEvent: return "afterModeEvent";
    case CheckPhase::Sample: return "duringEpisodeSample";
    case CheckPhase::EpisodeEnd: return "episodeEnd";
    case CheckPhase::Injected: return "injected";
  }
  return "?";
}

Monitor::Monitor(const ElaboratedProject& p, double eqTol) : p_(p) {
  opt_.realEqTol = eqTol;
  for (const auto& i : p.interfaces) {
    for (const auto& v : i.vars)
      if (v.type) items_.push_back({"type-violation", v.name, 0, v.type, v.name});
    int k = 0;
    for (const auto& inv : i.localInvariants) items_.push_back({"invariant-violation", i.name, k++, inv, ""});
    for (const auto& t2 : i.typeII) items_.push_back({"invariant-violation", i.name, k++, t2.whole, ""});
  }
  for (const auto& m : p.machines) {
    for (const auto& v : m.localVars)
      if (v.type) items_.push_back({"type-violation", v.name, 0, v.type, v.name});
    int k = 0;
    for (const auto& inv : m.localInvariants) items_.push_back({"invariant-violation", m.name, k++, inv, ""});
  }
  for (const auto& g : p.globalInvariants)
    global_.push_back({"global-invariant-violation", g.source, g.index, g.whole, ""});
  for (const auto* v : p.all_vars()) varNames_.push_back(v->name);
  varNames_.push_back(p.timeVariable);
}

Valuation Monitor::variables_only(const Valuation& v) const {
  Valuation out;
  out.time = v.time;
  for (const auto& n : varNames_)
    if (const Value* x = v.lookup(n)) out.set(n, *x);
  return out;
}

std::vector<Violation> Monitor::run(const std::vector<Item>& items, const Valuation& v, double t,
                                    CheckPhase phase) const {
  std::vector<Violation> out;
  OverlayScope scope(&v);
  scope.bind(p_.timeVariable, Value::real(t));
  for (const auto& it : items) {
    EvalError err("", "");
    bool ok = false;
    bool evaluated = false;
    if (!it.var.empty()) {
      const Value* x = v.lookup(it.var);
      if (!x) {
        err = EvalError("unknown-identifier", it.var + " has no value");
      } else {
        try {
          ok = member_of(*x, *it.pred, scope, opt_);
          evaluated = true;
        } catch (const EvalError& e) {
          err = e;
        }
      }
    } else if (auto r = try_eval(*it.pred, scope, opt_, &err)) {
      evaluated = r->kind() == ValueKind::Bool;
      ok = evaluated && r->as_bool();
      if (!evaluated) err = EvalError("type-mismatch", "predicate is not boolean");
    }
    if (evaluated && ok) continue;
    Violation viol;
    viol.t = t;
    viol.code = evaluated ? it.code : "evaluation-error";
    viol.source = it.source;
    viol.index = it.index;
    viol.predicate = it.var.empty() ? pretty_print(it.pred) : it.var + " ∈ " + pretty_print(it.pred);
    viol.phase = phase;
    viol.message = evaluated ? "predicate is false" : err.code + ": " + err.what();
    viol.snapshot = variables_only(v);
    out.push_back(std::move(viol));
  }
  return out;
}

std::vector<Violation> Monitor::check_point(const Valuation& v, double t, CheckPhase phase) const {
  auto out = run(items_, v, t, phase);
  auto g = run(global_, v, t, phase);
  out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<Violation> Monitor::check_global(const Valuation& v, double t) const {
  return run(global_, v, t, CheckPhase::Sample);
}

bool check_global_invariant_window(const std::vector<double>& schedule, double width, double t) {
  for (double s : schedule)
    if (s <= t && t <= s + width) return false;
  return true;
}

}  // namespace heb
