#include "heb/scheduler.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "heb/geometry.hpp"

namespace heb {

const char* policy_name(AsynchPolicy p) {
  return p == AsynchPolicy::EarliestPlusMargin ? "earliest-plus-margin" : "uniform-random-in-window";
}

std::optional<AsynchPolicy> parse_policy(const std::string& s) {
  if (s == "earliest-plus-margin") return AsynchPolicy::EarliestPlusMargin;
  if (s == "uniform-random-in-window") return AsynchPolicy::UniformInWindow;
  return std::nullopt;
}

int RunResult::exit_code() const {
  if (status == RunStatus::Aborted) return 4;
  return violations.empty() ? 0 : 3;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RunAbort {
  std::string code;
  std::string message;
};

// A schedulable mode transition: a lone mode event, or a synch group whose
// members fire together.
struct Unit {
  std::string name;
  bool group = false;
  bool asynch = false;
  std::vector<const ElabEvent*> members;
  std::vector<int> machines;  // sorted indices
  int firstMachine = 0;
  ExprPtr guard;
  ExprPtr paramFree;                 // conjuncts mentioning no unbound parameter
  std::vector<std::string> free;     // parameters that need a binding
  std::vector<std::string> outputs;  // parameters a member's body binds

  bool armed = false;
  double fireAt = 0.0;
  double blockedUntil = -kInf;  // end of the window already served
};

struct Binding {
  enum class State { Disabled, Ready, Unbound } state = State::Disabled;
  std::map<std::string, Value> values;
  int scenarioPos = INT_MAX;
};

void collect_eq_atoms(const ExprPtr& e, std::vector<const Expr*>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Binary && e->binop == BinOp::Eq) out.push_back(e.get());
  for (const auto& a : e->args) collect_eq_atoms(a, out);
}

}  // namespace

struct Simulator::Impl {
  const ElaboratedProject& p;
  RunConfig cfg;
  ScenarioBindings scenario;
  Monitor monitor;
  std::mt19937_64 rng;
  std::string tv;
  double margin = 1e-3;

  Valuation vals;
  double now = 0.0;
  std::vector<Unit> units;
  std::vector<int> active;  // per machine: pliant event index, -1 when idle
  std::map<std::string, int> fired;
  std::vector<std::string> pliantVars;
  std::set<std::string> pliantSet;

  Trace trace;
  std::vector<Violation> violations;
  std::set<std::string> violationKeys;
  double violationKeyTime = -kInf;
  std::vector<EventOccurrence> occurrences;

  std::set<int> crossedUnits;
  std::map<const Expr*, CrossedAtom> crossedAtoms;
  int microStep = 0;
  double microStepTime = -kInf;
  std::size_t nextFault = 0;
  bool done = false;
  bool aborted = false;
  std::string abortCode, abortMessage;
  std::size_t fallbackBase = 0;

  Impl(const ElaboratedProject& proj, RunConfig c, ScenarioBindings sc)
      : p(proj), cfg(std::move(c)), scenario(std::move(sc)), monitor(proj, cfg.numeric.epsGuard), rng(cfg.seed),
        tv(proj.timeVariable) {
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
      throw std::invalid_argument("horizon must be a positive finite number");
    if (cfg.margin) {
      margin = *cfg.margin;
    } else if (const Value* d = p.constants.lookup("δ"); d && d->is_numeric()) {
      margin = d->as_real() / 100;
    }
    std::sort(cfg.faults.begin(), cfg.faults.end(), [](const Fault& a, const Fault& b) { return a.t < b.t; });
    for (const auto* v : p.all_vars())
      if (v->kind == VarKind::Pliant) pliantSet.insert(v->name);
    pliantVars.assign(pliantSet.begin(), pliantSet.end());
    build_units();
    fallbackBase = planner_fallbacks();
  }

  // ---- setup ------------------------------------------------------------

  int machine_index(const std::string& name) const {
    for (std::size_t i = 0; i < p.machines.size(); ++i)
      if (p.machines[i].name == name) return static_cast<int>(i);
    return -1;
  }

  void finish_unit(Unit& u) {
    std::set<int> ms;
    std::vector<ExprPtr> parts;
    std::set<std::string> outs, all;
    for (const auto* e : u.members) {
      ms.insert(machine_index(e->machine));
      parts.insert(parts.end(), e->guard.begin(), e->guard.end());
      if (e->status == EventStatus::Asynch) u.asynch = true;
      for (const auto& prm : e->params) {
        all.insert(prm.name);
        if (prm.dir == ParamDir::Output) outs.insert(prm.name);
      }
    }
    u.machines.assign(ms.begin(), ms.end());
    u.firstMachine = u.machines.empty() ? 0 : u.machines.front();
    u.outputs.assign(outs.begin(), outs.end());
    for (const auto& n : all)
      if (!outs.count(n)) u.free.push_back(n);
    u.guard = conjoin(parts);
    std::vector<ExprPtr> pf;
    for (const auto& g : parts)
      if (!mentions_any(g, u.free)) pf.push_back(g);
    u.paramFree = conjoin(pf);
  }

  void build_units() {
    for (const auto& m : p.machines)
      for (const auto& e : m.events) {
        if (!e.is_mode() || e.synchGroup) continue;
        Unit u;
        u.name = e.name;
        u.members = {&e};
        finish_unit(u);
        units.push_back(std::move(u));
      }
    for (const auto& g : p.synchGroups) {
      Unit u;
      u.name = g.name;
      u.group = true;
      for (const auto& [mn, en] : g.members)
        if (const ElabMachine* m = p.find_machine(mn))
          if (const ElabEvent* e = m->find_event(en)) u.members.push_back(e);
      finish_unit(u);
      units.push_back(std::move(u));
    }
  }

  // ---- evaluation helpers -----------------------------------------------

  EvalOptions instant_opt() const {
    EvalOptions o;
    const double eps = cfg.numeric.epsGuard;
    o.eqHook = [this, eps](const Expr& atom, double l, double r) -> std::optional<bool> {
      auto it = crossedAtoms.find(&atom);
      if (it != crossedAtoms.end() && it->second.lhs == l && it->second.rhs == r) return true;
      return std::fabs(l - r) <= eps;
    };
    return o;
  }

  bool holds(const ExprPtr& g, const std::map<std::string, Value>& b, double t) const {
    if (!g) return true;
    OverlayScope s(&vals);
    for (const auto& [k, v] : b) s.bind(k, v);
    s.bind(tv, Value::real(t));
    auto v = try_eval(*g, s, instant_opt());
    return v && v->kind() == ValueKind::Bool && v->as_bool();
  }

  std::size_t pick(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(rng() % n); }
  double uniform01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  std::set<std::string> driven_set() const {
    std::set<std::string> d;
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      for (const auto& c : p.machines[m].clocks) d.insert(c);
      if (active[m] < 0) continue;
      for (const auto& v : driven_variables(p.machines[m].events[active[m]])) d.insert(v);
    }
    return d;
  }

  bool continuous(const Unit& u, const std::set<std::string>& driven) const {
    return mentions_any(u.paramFree, std::vector<std::string>(driven.begin(), driven.end()));
  }

  // ---- parameters ---------------------------------------------------------

  Binding bind(const Unit& u) {
    Binding b;
    if (!holds(u.paramFree, {}, now)) return b;
    if (u.free.empty()) {
      b.state = holds(u.guard, {}, now) ? Binding::State::Ready : Binding::State::Disabled;
      return b;
    }
    for (const auto* e : u.members) {
      if (e->params.empty()) continue;
      const ScenarioEntry* entry = scenario.find(e->machine, e->name, fired[e->machine + "." + e->name] + 1);
      if (!entry) continue;
      b.scenarioPos = std::min(b.scenarioPos, entry->position);
      for (const auto& [k, lit] : entry->bindings) {
        if (std::find(u.free.begin(), u.free.end(), k) == u.free.end()) continue;
        try {
          b.values[k] = resolve_literal(lit, p);
        } catch (const EvalError& err) {
          throw RunAbort{"scenario-error", std::string("binding ") + k + " of " + e->name + ": " + err.what()};
        }
      }
    }
    std::vector<std::string> open;
    for (const auto& f : u.free)
      if (!b.values.count(f)) open.push_back(f);
    if (open.empty()) {
      b.state = holds(u.guard, b.values, now) ? Binding::State::Ready : Binding::State::Disabled;
      return b;
    }
    // Remaining parameters need an enumerable range `x ∈ S` in the guard.
    std::vector<std::vector<Value>> domains;
    for (const auto& name : open) {
      std::optional<std::vector<Value>> dom;
      for (const auto& c : conjuncts(u.guard)) {
        if (c->kind != ExprKind::Binary || (c->binop != BinOp::In && c->binop != BinOp::Colon)) continue;
        if (c->args[0]->kind != ExprKind::Ident || c->args[0]->text != name) continue;
        if (mentions_any(c->args[1], u.free)) continue;
        OverlayScope s(&vals);
        s.bind(tv, Value::real(now));
        auto v = try_eval(*c->args[1], s, {});
        if (v && v->kind() == ValueKind::Set) {
          dom = v->items();
          break;
        }
      }
      if (!dom) {
        b.state = Binding::State::Unbound;
        return b;
      }
      domains.push_back(std::move(*dom));
    }
    std::vector<std::map<std::string, Value>> ok;
    std::vector<std::size_t> idx(open.size(), 0);
    std::size_t visited = 0;
    while (true) {
      if (std::any_of(domains.begin(), domains.end(), [](const auto& d) { return d.empty(); })) break;
      std::map<std::string, Value> trial = b.values;
      for (std::size_t k = 0; k < open.size(); ++k) trial[open[k]] = domains[k][idx[k]];
      if (holds(u.guard, trial, now)) ok.push_back(std::move(trial));
      if (++visited > 100000) throw RunAbort{"unbound-any", u.name + ": parameter space too large to enumerate"};
      std::size_t k = 0;
      while (k < open.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
      if (k == open.size()) break;
    }
    if (ok.empty()) return b;
    b.values = ok[pick(ok.size())];
    b.state = Binding::State::Ready;
    return b;
  }

  // ---- violations and trace ------------------------------------------------

  void record(std::vector<Violation> vs) {
    for (auto& v : vs) {
      if (v.t != violationKeyTime) {
        violationKeys.clear();
        violationKeyTime = v.t;
      }
      const std::string key = v.code + "|" + v.source + "|" + std::to_string(v.index);
      if (!violationKeys.insert(key).second) continue;
      violations.push_back(std::move(v));
    }
  }

  void check(double t, CheckPhase phase, const Valuation& v) {
    if (cfg.monitor) record(monitor.check_point(v, t, phase));
  }

  // ---- firing -------------------------------------------------------------

  EventOccurrence fire(int unitIdx, Binding b) {
    Unit& u = units[unitIdx];
    check(now, CheckPhase::BeforeEvent, vals);

    std::vector<Delta> deltas;
    auto note = [&](const std::string& var, const Value& before, const Value& after) {
      for (auto& d : deltas)
        if (d.var == var) {
          d.after = after;
          return;
        }
      deltas.push_back({var, before, after});
    };

    // Equality guards that were met by crossing are made exact.
    std::vector<const Expr*> atoms;
    collect_eq_atoms(u.guard, atoms);
    for (std::size_t pass = 0; pass <= atoms.size(); ++pass) {
      bool changed = false;
      for (const Expr* atom : atoms) {
        for (int side = 0; side < 2; ++side) {
          const Expr& x = *atom->args[side];
          if (x.kind != ExprKind::Ident || !pliantSet.count(x.text)) continue;
          const Value* cur = vals.lookup(x.text);
          OverlayScope s(&vals);
          for (const auto& [k, v] : b.values) s.bind(k, v);
          auto target = try_eval(*atom->args[1 - side], s, {});
          if (!cur || !target || !cur->is_numeric() || !target->is_numeric()) continue;
          const double c = cur->as_real(), t = target->as_real();
          if (c == t || std::fabs(c - t) > 1e-6 * (1.0 + std::fabs(t))) continue;
          note(x.text, *cur, Value::real(t));
          vals.set(x.text, Value::real(t));
          changed = true;
          break;
        }
      }
      if (!changed) break;
    }

    // Bodies see the pre-state; outputs are bound before the readers run.
    std::map<std::string, Value> binds = b.values;
    auto scope_with = [&](OverlayScope& s) {
      for (const auto& [k, v] : binds) s.bind(k, v);
      s.bind(tv, Value::real(now));
    };
    for (const auto* e : u.members)
      for (const auto& a : e->assigns) {
        if (std::find(u.outputs.begin(), u.outputs.end(), a.target) == u.outputs.end()) continue;
        OverlayScope s(&vals);
        scope_with(s);
        EvalError err("", "");
        auto v = try_eval(*a.value, s, {}, &err);
        if (!v) throw RunAbort{"evaluation-error", e->machine + "." + e->name + ": " + err.what()};
        binds[a.target] = *v;
      }
    std::vector<std::pair<std::string, Value>> writes;
    std::map<std::string, std::string> writer;
    for (const auto* e : u.members)
      for (const auto& a : e->assigns) {
        if (std::find(u.outputs.begin(), u.outputs.end(), a.target) != u.outputs.end() ||
            std::find(u.free.begin(), u.free.end(), a.target) != u.free.end())
          continue;
        OverlayScope s(&vals);
        scope_with(s);
        EvalError err("", "");
        auto v = try_eval(*a.value, s, {}, &err);
        if (!v) throw RunAbort{"evaluation-error", e->machine + "." + e->name + ": " + err.what()};
        auto prev = std::find_if(writes.begin(), writes.end(), [&](const auto& w) { return w.first == a.target; });
        if (prev != writes.end()) {
          if (prev->second != *v)
            throw RunAbort{"synch-write-conflict", writer[a.target] + " and " + e->machine + "." + e->name +
                                                       " write different values to " + a.target};
          continue;
        }
        writer[a.target] = e->machine + "." + e->name;
        writes.emplace_back(a.target, *v);
      }
    for (auto& [var, v] : writes) {
      const Value* cur = vals.lookup(var);
      const Value before = cur ? *cur : Value();
      vals.set(var, v);
      note(var, before, v);
    }
    deltas.erase(std::remove_if(deltas.begin(), deltas.end(), [](const Delta& d) { return d.before && *d.before == d.after; }),
                 deltas.end());

    if (now != microStepTime) {
      microStepTime = now;
      microStep = 0;
    }
    EventOccurrence occ;
    occ.t = now;
    occ.microStep = microStep++;
    occ.name = u.name;
    for (int m : u.machines) occ.machines.push_back(p.machines[m].name);
    for (const auto* e : u.members) occ.members.push_back(e->machine + "." + e->name);
    occ.asynch = u.asynch;
    occ.bindings = binds;
    occ.deltas = deltas;
    for (const auto* e : u.members) ++fired[e->machine + "." + e->name];

    TraceRecord r;
    r.t = now;
    r.kind = RecordKind::ModeEvent;
    r.machines = occ.machines;
    r.event = u.name;
    r.deltas = deltas;
    r.microStep = occ.microStep;
    if (u.group) r.members = occ.members;
    r.bindings = binds;
    append(trace, std::move(r));

    crossedUnits.erase(unitIdx);
    if (u.asynch) {
      u.armed = false;
      auto w = next_true_window(*u.paramFree, vals, tv, now, true, instant_opt());
      u.blockedUntil = (w && w->start == now) ? w->end : -kInf;
    }
    check(now, CheckPhase::AfterEvent, vals);
    occurrences.push_back(occ);
    return occ;
  }

  // ---- one instant ------------------------------------------------------------

  void micro_loop(std::set<int>& touched) {
    std::size_t steps = 0;
    while (true) {
      std::vector<std::pair<int, Binding>> due;
      std::vector<int> blocked;
      for (std::size_t i = 0; i < units.size(); ++i) {
        Unit& u = units[i];
        const bool crossed = crossedUnits.count(static_cast<int>(i)) > 0;
        if (u.asynch && !crossed && (!u.armed || u.fireAt > now)) continue;
        Binding b = bind(u);
        if (b.state == Binding::State::Ready) due.emplace_back(static_cast<int>(i), std::move(b));
        else if (b.state == Binding::State::Unbound) blocked.push_back(static_cast<int>(i));
        else if (u.asynch && u.armed) u.armed = false;
      }
      if (due.empty() && blocked.empty()) return;
      int chosen = -1;
      for (int m = 0; m < static_cast<int>(p.machines.size()) && chosen < 0; ++m) {
        if (std::any_of(due.begin(), due.end(), [&](const auto& d) { return units[d.first].firstMachine == m; })) {
          chosen = m;
          break;
        }
        for (int i : blocked)
          if (units[i].firstMachine == m)
            throw RunAbort{"unbound-any", p.machines[m].name + "." + units[i].name +
                                              " is enabled but its parameters have no scenario binding"};
      }
      if (chosen < 0) return;
      std::vector<std::pair<int, Binding>> cands;
      for (auto& d : due)
        if (units[d.first].firstMachine == chosen) cands.push_back(std::move(d));
      std::size_t k = 0;
      int best = INT_MAX;
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (cands[i].second.scenarioPos < best) {
          best = cands[i].second.scenarioPos;
          k = i;
        }
      if (best == INT_MAX) k = pick(cands.size());
      const int idx = cands[k].first;
      fire(idx, std::move(cands[k].second));
      for (int m : units[idx].machines) touched.insert(m);
      if (++steps > cfg.zenoCap)
        throw RunAbort{"zeno", "more than " + std::to_string(cfg.zenoCap) + " mode events at t=" + format_real(now)};
    }
  }

  bool pliant_enabled(const ElabEvent& e) const {
    for (const auto& g : e.guard)
      if (!holds(g, {}, now)) return false;
    for (const auto& g : e.initGuard)
      if (!holds(g, {}, now)) return false;
    return true;
  }

  void reselect_pliant(const std::set<int>& touched) {
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      const auto& M = p.machines[m];
      const int cur = active[m];
      if (cur >= 0 && !touched.count(static_cast<int>(m)) && pliant_enabled(M.events[cur])) continue;
      std::vector<int> cands;
      for (std::size_t i = 0; i < M.events.size(); ++i)
        if (M.events[i].status == EventStatus::Pliant && pliant_enabled(M.events[i])) cands.push_back(static_cast<int>(i));
      active[m] = cands.empty() ? -1 : cands[pick(cands.size())];
    }
  }

  bool asynch_armed_for(int m) const {
    for (const auto& u : units)
      if (u.asynch && u.armed && std::find(u.machines.begin(), u.machines.end(), m) != u.machines.end())
        return true;
    return false;
  }

  void rearm_asynch() {
    const auto driven = driven_set();
    const EvalOptions opt = instant_opt();
    for (auto& u : units) {
      if (!u.asynch) continue;
      const bool nowTrue = holds(u.paramFree, {}, now);
      if (!nowTrue) u.blockedUntil = -kInf;
      if (u.armed) {
        if (u.fireAt >= now && holds(u.paramFree, {}, u.fireAt)) continue;
        u.armed = false;
      }
      if (continuous(u, driven)) continue;
      double from = now;
      bool inclusive = nowTrue;
      if (u.blockedUntil > now || (nowTrue && u.blockedUntil == now)) {
        from = u.blockedUntil;
        inclusive = false;
      }
      auto w = next_true_window(*u.paramFree, vals, tv, from, inclusive, opt);
      if (!w) continue;
      double at;
      if (w->is_point()) {
        at = w->start;
      } else {
        const double len = w->end - w->start;
        if (cfg.policy == AsynchPolicy::UniformInWindow) {
          const double hi = std::isinf(w->end) ? w->start + 2 * margin : w->end;
          at = w->start + uniform01() * (hi - w->start);
          if (!(at > w->start && at < hi) || !holds(u.paramFree, {}, at))
            at = len <= margin ? w->start + len / 2 : w->start + margin;
        } else {
          at = len <= margin ? w->start + len / 2 : w->start + margin;
        }
      }
      u.armed = true;
      u.fireAt = at;
    }
  }

  void process_instant(bool initial) {
    vals.set(tv, Value::real(now));
    vals.time = now;
    while (nextFault < cfg.faults.size() && cfg.faults[nextFault].t <= now) {
      vals.set(cfg.faults[nextFault].var, cfg.faults[nextFault].value);
      check(now, CheckPhase::Injected, vals);
      ++nextFault;
    }
    for (std::size_t round = 0;; ++round) {
      std::set<int> touched;
      micro_loop(touched);
      reselect_pliant(touched);
      rearm_asynch();
      bool again = false;
      for (const auto& u : units)
        if (u.asynch && u.armed && u.fireAt <= now) again = true;
      if (!again) break;
      if (round > cfg.zenoCap)
        throw RunAbort{"zeno", "asynch events keep re-arming at t=" + format_real(now)};
    }
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      if (active[m] >= 0 || asynch_armed_for(static_cast<int>(m))) continue;
      throw RunAbort{initial ? "no-pliant-successor" : "no-successor",
                     p.machines[m].name + " has no enabled pliant event at t=" + format_real(now)};
    }
    crossedUnits.clear();
    crossedAtoms.clear();
  }

  double plan_next() {
    double next = cfg.horizon;
    const auto driven = driven_set();
    const EvalOptions opt = instant_opt();
    for (const auto& u : units) {
      if (u.asynch) {
        if (u.armed && u.fireAt > now) next = std::min(next, u.fireAt);
        continue;
      }
      if (continuous(u, driven)) continue;
      auto w = next_true_window(*u.paramFree, vals, tv, now, false, opt);
      if (!w) continue;
      if (!w->startClosed && w->start == now && holds(u.paramFree, {}, now)) continue;
      next = std::min(next, w->startClosed ? w->start : w->start + cfg.numeric.epsT);
    }
    if (nextFault < cfg.faults.size()) next = std::min(next, cfg.faults[nextFault].t);
    if (next <= now) next = now + cfg.numeric.epsT;
    return next;
  }

  // ---- lifecycle -----------------------------------------------------------------

  void finish() {
    TraceRecord r;
    r.t = now;
    r.kind = RecordKind::RunEnd;
    r.microStep = 0;
    r.info["status"] = aborted ? "aborted" : "completed";
    if (aborted) {
      r.info["code"] = abortCode;
      r.info["message"] = abortMessage;
    }
    append(trace, std::move(r));
    done = true;
  }

  void abort(const RunAbort& a) {
    aborted = true;
    abortCode = a.code;
    abortMessage = a.message;
    finish();
  }

  void init_run() {
    vals = p.constants;
    vals.set(tv, Value::real(0.0));
    vals.time = 0.0;
    now = 0.0;
    active.assign(p.machines.size(), -1);
    try {
      auto run_init = [&](const std::vector<Assignment>& as, const std::string& who) {
        for (const auto& a : as) {
          EvalError err("", "");
          auto v = try_eval(*a.value, vals, {}, &err);
          if (!v) throw RunAbort{"evaluation-error", who + " INITIALISATION of " + a.target + ": " + err.what()};
          vals.set(a.target, *v);
        }
      };
      for (const auto& i : p.interfaces) run_init(i.initialisation, i.name);
      for (const auto& m : p.machines) {
        run_init(m.initialisation, m.name);
        for (const auto& c : m.clocks) vals.set(c, Value::real(0.0));
      }
      TraceRecord h;
      h.t = 0.0;
      h.kind = RecordKind::Header;
      h.event = p.name;
      const Valuation initial = monitor.variables_only(vals);
      for (const auto& [name, v] : std::map<std::string, Value>(initial.values.begin(), initial.values.end()))
        if (name != tv) h.deltas.push_back({name, std::nullopt, v});
      h.info = cfg.headerInfo;
      h.info["seed"] = std::to_string(cfg.seed);
      h.info["horizon"] = format_real(cfg.horizon);
      h.info["policy"] = policy_name(cfg.policy);
      h.info["margin"] = format_real(margin);
      h.info["dtMax"] = format_real(cfg.numeric.dtMax);
      h.info["epsT"] = format_real(cfg.numeric.epsT);
      h.info["epsGuard"] = format_real(cfg.numeric.epsGuard);
      h.info["sampleStep"] = format_real(cfg.numeric.sampleStep);
      append(trace, std::move(h));
      check(0.0, CheckPhase::Init, vals);
      process_instant(true);
    } catch (const RunAbort& a) {
      abort(a);
    }
  }

  OdeSystem build_system() const {
    OdeSystem sys;
    sys.timeVar = tv;
    static const ExprPtr one = make_number({1, 1}, "1");
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      for (const auto& c : p.machines[m].clocks) {
        sys.stateVars.push_back(c);
        sys.rhs.push_back(one);
      }
      if (active[m] < 0) continue;
      const ElabEvent& e = p.machines[m].events[active[m]];
      for (const auto& o : e.odes) {
        sys.stateVars.push_back(o.target);
        sys.rhs.push_back(o.value);
      }
      for (const auto& a : e.solveAssigns) sys.directAssigns.emplace_back(a.target, a.value);
    }
    return sys;
  }

  bool advance() {
    if (done) return false;
    try {
      const double tNext = std::min(plan_next(), cfg.horizon);
      const OdeSystem sys = build_system();
      std::set<std::string> driven(sys.stateVars.begin(), sys.stateVars.end());
      for (const auto& [v, _] : sys.directAssigns) driven.insert(v);
      std::vector<WatchGuard> watch;
      for (std::size_t i = 0; i < units.size(); ++i)
        if (continuous(units[i], driven)) watch.push_back({std::to_string(i), units[i].paramFree});
      EpisodeResult res = integrate_episode(sys, vals, now, watch, tNext, cfg.numeric, true);
      for (auto& [s, v] : res.samples) {
        TraceRecord r;
        r.t = s;
        r.kind = RecordKind::Sample;
        for (const auto& name : pliantVars)
          if (const Value* x = v.lookup(name)) r.deltas.push_back({name, std::nullopt, *x});
        if (cfg.keepSamples) append(trace, std::move(r));
        check(s, CheckPhase::Sample, v);
      }
      if (res.cause == Termination::Infeasible) throw RunAbort{"infeasible", res.error};
      vals = std::move(res.endValuation);
      now = res.endTime;
      check(now, CheckPhase::EpisodeEnd, vals);
      if (res.cause == Termination::GuardCrossing) {
        for (const auto& id : res.crossed) crossedUnits.insert(std::stoi(id));
        crossedAtoms = std::move(res.crossedAtoms);
      }
      if (now >= cfg.horizon) {
        finish();
        return false;
      }
      process_instant(false);
    } catch (const RunAbort& a) {
      abort(a);
      return false;
    }
    return !done;
  }

  std::vector<Violation> check_handover(const std::vector<std::string>& names) const {
    std::vector<Violation> out;
    for (const auto& n : names) {
      const int m = machine_index(n);
      if (m < 0) continue;
      const auto& M = p.machines[m];
      bool pliant = false;
      for (const auto& e : M.events)
        if (e.status == EventStatus::Pliant && pliant_enabled(e)) pliant = true;
      auto make = [&](const std::string& code, const std::string& msg) {
        Violation v;
        v.t = now;
        v.code = code;
        v.source = n;
        v.phase = CheckPhase::AfterEvent;
        v.message = msg;
        v.snapshot = monitor.variables_only(vals);
        return v;
      };
      if (!pliant && !asynch_armed_for(m)) out.push_back(make("no-pliant-successor", n + " has no enabled pliant event"));
      for (const auto& u : units) {
        if (u.asynch || std::find(u.machines.begin(), u.machines.end(), m) == u.machines.end()) continue;
        if (u.free.empty() && holds(u.guard, {}, now))
          out.push_back(make("mode-event-enabled", u.name + " is still enabled after the handover"));
      }
    }
    return out;
  }

  RunResult result() {
    RunResult r;
    r.status = aborted ? RunStatus::Aborted : RunStatus::Completed;
    r.abortCode = abortCode;
    r.abortMessage = abortMessage;
    r.endTime = now;
    r.trace = trace;
    r.violations = violations;
    r.occurrences = occurrences;
    r.finalState = monitor.variables_only(vals);
    for (std::size_t m = 0; m < p.machines.size(); ++m)
      r.activePliant[p.machines[m].name] = active.empty() || active[m] < 0 ? "" : p.machines[m].events[active[m]].name;
    r.plannerFallbacks = planner_fallbacks() - fallbackBase;
    return r;
  }
};

Simulator::Simulator(const ElaboratedProject& p, RunConfig cfg, ScenarioBindings scenario)
    : impl_(std::make_unique<Impl>(p, std::move(cfg), std::move(scenario))) {}
Simulator::~Simulator() = default;

void Simulator::init_run() { impl_->init_run(); }
bool Simulator::advance() { return impl_->advance(); }
bool Simulator::finished() const { return impl_->done; }
double Simulator::now() const { return impl_->now; }
const Valuation& Simulator::state() const { return impl_->vals; }
RunResult Simulator::result() { return impl_->result(); }

std::optional<EventOccurrence> Simulator::fire_synch(const std::string& group) {
  for (std::size_t i = 0; i < impl_->units.size(); ++i) {
    auto& u = impl_->units[i];
    if (!u.group || u.name != group) continue;
    try {
      Binding b = impl_->bind(u);
      if (b.state != Binding::State::Ready) return std::nullopt;
      return impl_->fire(static_cast<int>(i), std::move(b));
    } catch (const RunAbort& a) {
      impl_->abort(a);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<Violation> Simulator::check_handover(const std::vector<std::string>& machines) const {
  return impl_->check_handover(machines);
}

RunResult run_to_horizon(const ElaboratedProject& p, const RunConfig& cfg, const ScenarioBindings& scenario) {
  Simulator sim(p, cfg, scenario);
  sim.init_run();
  while (sim.advance()) {
  }
  return sim.result();
}

}  // namespace heb
