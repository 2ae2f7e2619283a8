#include "heb/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "heb/cli.hpp"
#include "heb/geometry.hpp"
#include "heb/monitor.hpp"
#include "heb/ode.hpp"
#include "heb/parser.hpp"
#include "heb/scenario.hpp"
#include "heb/scheduler.hpp"
#include "heb/trace.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace heb {

namespace {

using json = nlohmann::json;

// Collects mismatches for one fixture.
struct Report {
  std::vector<std::string> diff;
  void mismatch(const std::string& what, const std::string& expected, const std::string& actual) {
    diff.push_back(what + ": expected " + expected + ", got " + actual);
  }
  void note(const std::string& s) { diff.push_back(s); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const std::set<std::string>& xs) {
  std::string out = "[";
  for (const auto& x : xs) out += (out.size() > 1 ? ", " : "") + x;
  return out + "]";
}

std::set<std::string> string_set(const json& j) {
  std::set<std::string> out;
  for (const auto& e : j) out.insert(e.get<std::string>());
  return out;
}

std::set<std::string> codes_of(const Diagnostics& ds, Severity sev) {
  std::set<std::string> out;
  for (const auto& d : ds)
    if (d.severity == sev) out.insert(d.code);
  return out;
}

void expect_set(Report& r, const std::string& what, const std::set<std::string>& expected,
                const std::set<std::string>& actual) {
  if (expected != actual) r.mismatch(what, join(expected), join(actual));
}

// Structural comparison of JSON-encoded values with an absolute tolerance on
// numbers.
bool json_close(const json& a, const json& b, double tol) {
  if (a.is_number() && b.is_number()) return std::fabs(a.get<double>() - b.get<double>()) <= tol;
  if (a.type() != b.type()) return false;
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], tol)) return false;
    return true;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!b.contains(it.key()) || !json_close(it.value(), b.at(it.key()), tol)) return false;
    return true;
  }
  return a == b;
}

bool value_matches(const Value& actual, const json& expected, double tol) {
  return json_close(json::parse(value_to_json(actual)), expected, tol);
}

const json& field(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

Valuation valuation_from(const json& env) {
  Valuation v;
  for (auto it = env.begin(); it != env.end(); ++it) v.set(it.key(), value_from_json(it.value().dump()));
  return v;
}

std::vector<std::string> resolve_paths(const fs::path& dir, const json& f) {
  std::vector<std::string> out;
  for (const auto& s : f.at("sources")) out.push_back((dir / s.get<std::string>()).lexically_normal().string());
  return out;
}

ParseResult parse_inputs(const fs::path& dir, const json& f) {
  if (f.contains("text")) {
    SourceUnit unit{(dir / "inline.heb").string(), f.at("text").get<std::string>(), {}};
    return parse_unit(unit);
  }
  return parse_project_dir(resolve_paths(dir, f));
}

const ConstructAst* find_construct(const ParseResult& pr, const std::string& name) {
  for (const auto& c : pr.constructs)
    if (c.name == name) return &c;
  return nullptr;
}

// parse: diagnostics, construct count, printed text, clause contents.
void run_parse(const fs::path& dir, const json& f, Report& r) {
  const ParseResult pr = parse_inputs(dir, f);
  const json& ex = f.at("expect");
  expect_set(r, "error codes", string_set(ex.value("errors", json::array())), codes_of(pr.diagnostics, Severity::Error));
  if (ex.contains("warnings"))
    expect_set(r, "warning codes", string_set(ex.at("warnings")), codes_of(pr.diagnostics, Severity::Warning));
  if (ex.contains("minConstructs") && pr.constructs.size() < ex.at("minConstructs").get<std::size_t>())
    r.mismatch("construct count", ">= " + ex.at("minConstructs").dump(), std::to_string(pr.constructs.size()));
  for (const auto& pc : ex.value("printed", json::array())) {
    const auto* c = find_construct(pr, pc.at("construct"));
    if (!c) {
      r.note("construct " + pc.at("construct").get<std::string>() + " not found");
      continue;
    }
    const std::string text = pretty_print(*c);
    for (const auto& needle : pc.at("contains"))
      if (text.find(needle.get<std::string>()) == std::string::npos)
        r.mismatch("printed " + c->name, "text containing \"" + needle.get<std::string>() + "\"", "\n" + text);
    if (pc.value("roundTrip", false)) {
      SourceUnit again{"reprint.heb", text, {}};
      const ParseResult re = parse_unit(again);
      if (re.constructs.size() != 1 || !construct_equal(re.constructs[0], *c))
        r.note("printed " + c->name + " does not re-parse to an equal construct");
    }
  }
  for (const auto& cc : ex.value("clauseNames", json::array())) {
    const auto* c = find_construct(pr, cc.at("construct"));
    if (!c) {
      r.note("construct " + cc.at("construct").get<std::string>() + " not found");
      continue;
    }
    std::set<std::string> names;
    for (const auto& cl : c->clauses)
      if (clause_keyword(cl.kind) == cc.at("clause").get<std::string>()) names.insert(cl.names.begin(), cl.names.end());
    expect_set(r, c->name + " " + cc.at("clause").get<std::string>(), string_set(cc.at("names")), names);
  }
}

// check: elaboration diagnostics and the shape of the elaborated project.
void run_check(const fs::path& dir, const json& f, Report& r) {
  ParseResult pr = parse_inputs(dir, f);
  const json& ex = f.at("expect");
  Diagnostics all = pr.diagnostics;
  ElaborationResult er;
  if (!has_errors(pr.diagnostics)) {
    er = elaborate(pr.constructs, {f.value("autoPliTrue", false)});
    all.insert(all.end(), er.diagnostics.begin(), er.diagnostics.end());
    if (er.ok()) {
      const auto scan = feasibility_scan(er.project);
      all.insert(all.end(), scan.begin(), scan.end());
    }
  }
  expect_set(r, "error codes", string_set(ex.value("errors", json::array())), codes_of(all, Severity::Error));
  if (ex.contains("warnings"))
    expect_set(r, "warning codes", string_set(ex.at("warnings")), codes_of(all, Severity::Warning));
  const auto& p = er.project;
  if (ex.contains("machines")) {
    std::set<std::string> names;
    for (const auto& m : p.machines) names.insert(m.name);
    expect_set(r, "machines", string_set(ex.at("machines")), names);
  }
  if (ex.contains("minSynchGroups") && p.synchGroups.size() < ex.at("minSynchGroups").get<std::size_t>())
    r.mismatch("synch groups", ">= " + ex.at("minSynchGroups").dump(), std::to_string(p.synchGroups.size()));
  for (const auto& cc : ex.value("contextConstants", json::array())) {
    const ElabContext* ctx = nullptr;
    for (const auto& c : p.contexts)
      if (c.name == cc.at("context").get<std::string>()) ctx = &c;
    if (!ctx) {
      r.note("context " + cc.at("context").get<std::string>() + " not elaborated");
      continue;
    }
    const std::set<std::string> have(ctx->constants.begin(), ctx->constants.end());
    for (const auto& n : cc.at("includes"))
      if (!have.count(n.get<std::string>())) r.mismatch(ctx->name + " constants", "to include " + n.dump(), join(have));
    for (const auto& n : cc.value("excludes", json::array()))
      if (have.count(n.get<std::string>())) r.mismatch(ctx->name + " constants", "not to include " + n.dump(), join(have));
  }
  for (const auto& cv : ex.value("constantValues", json::array())) {
    const auto* v = p.constants.lookup(cv.at("name").get<std::string>());
    if (!v)
      r.note("constant " + cv.at("name").get<std::string>() + " has no value");
    else if (!value_matches(*v, cv.at("value"), cv.value("tol", 0.0)))
      r.mismatch("constant " + cv.at("name").get<std::string>(), cv.at("value").dump(), value_to_json(*v));
  }
}

void run_free_identifiers(const json& f, Report& r) {
  Diagnostics ds;
  ExprPtr e = parse_expression(f.at("expr"), &ds);
  if (!e) {
    r.note("expression does not parse: " + (ds.empty() ? std::string("?") : format_diagnostic(ds[0])));
    return;
  }
  const auto got = free_identifiers(e, string_set(f.value("bound", json::array())));
  expect_set(r, "free identifiers", string_set(f.at("expect")), got);
}

void run_eval(const json& f, Report& r) {
  Diagnostics ds;
  ExprPtr e = parse_expression(f.at("expr"), &ds);
  if (!e) {
    r.note("expression does not parse: " + (ds.empty() ? std::string("?") : format_diagnostic(ds[0])));
    return;
  }
  const Valuation env = valuation_from(f.value("env", json::object()));
  EvalError err("", "");
  const auto v = try_eval(*e, env, {}, &err);
  if (f.contains("error")) {
    if (v) r.mismatch("evaluation", "error " + f.at("error").get<std::string>(), value_to_json(*v));
    else if (err.code != f.at("error").get<std::string>()) r.mismatch("error code", f.at("error").dump(), err.code);
    return;
  }
  if (!v) {
    r.mismatch("evaluation", f.at("expect").dump(), "error " + err.code + ": " + err.what());
    return;
  }
  if (!value_matches(*v, f.at("expect"), f.value("tol", 0.0)))
    r.mismatch("value", f.at("expect").dump(), value_to_json(*v));
}

void run_window(const json& f, Report& r) {
  std::vector<double> sched = f.at("schedule").get<std::vector<double>>();
  const bool got = check_global_invariant_window(sched, f.at("width").get<double>(), f.at("t").get<double>());
  if (got != f.at("expect").get<bool>()) r.mismatch("outside all windows", f.at("expect").dump(), got ? "true" : "false");
}

// next-window: earliest time a guard holds, exactly for time-only guards.
void run_next_window(const json& f, Report& r) {
  Diagnostics ds;
  ExprPtr g = parse_expression(f.at("guard"), &ds);
  if (!g) {
    r.note("guard does not parse");
    return;
  }
  const Valuation env = valuation_from(f.value("env", json::object()));
  const auto w = next_true_window(*g, env, f.value("timeVar", "t"), f.at("from").get<double>(),
                                  f.value("includeFrom", true));
  const json& ex = f.at("expect");
  if (ex.is_null()) {
    if (w) r.mismatch("window", "none", format_real(w->start));
    return;
  }
  if (!w) {
    r.mismatch("window", ex.dump(), "none");
    return;
  }
  const double tol = f.value("tol", 0.0);
  if (std::fabs(w->start - ex.at("start").get<double>()) > tol)
    r.mismatch("window start", format_real(ex.at("start").get<double>()), format_real(w->start));
  if (ex.contains("point") && w->is_point() != ex.at("point").get<bool>())
    r.mismatch("point window", ex.at("point").dump(), w->is_point() ? "true" : "false");
}

Vec2 vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void run_calc_traj(const json& f, Report& r) {
  std::vector<Hazard> hs;
  for (const auto& h : f.value("hazards", json::array()))
    hs.push_back({h.at("shape") == "SQ" ? HazardShape::Square : HazardShape::Cylinder, h.at("cx"), h.at("cy"),
                  h.at("size"), h.at("height")});
  const auto path = calc_traj(vec2(f.at("current")), vec2(f.at("dest")), hs, GeometryConfig{});
  json got = json::array();
  for (const auto& p : path) got.push_back({p.x, p.y});
  if (!json_close(got, f.at("expect"), f.value("tol", 0.0))) r.mismatch("waypoints", f.at("expect").dump(), got.dump());
}

// Variable values at time `t` reconstructed from the header and the
// mode-event deltas; pliant variables come from the nearest earlier sample.
std::map<std::string, Value> state_at(const Trace& tr, double t) {
  std::map<std::string, Value> s;
  for (const auto& rec : tr.records) {
    if (rec.t > t) break;
    if (rec.kind == RecordKind::Header || rec.kind == RecordKind::ModeEvent || rec.kind == RecordKind::Sample)
      for (const auto& d : rec.deltas) s[d.var] = d.after;
  }
  return s;
}

bool event_matches(const EventOccurrence& o, const json& e) {
  const std::string name = e.at("event");
  if (o.name != name && std::find(o.members.begin(), o.members.end(), name) == o.members.end()) return false;
  if (e.contains("t") && std::fabs(o.t - e.at("t").get<double>()) > e.value("tol", 0.0)) return false;
  for (auto it = field(e, "deltas").begin(); it != field(e, "deltas").end(); ++it) {
    auto d = std::find_if(o.deltas.begin(), o.deltas.end(), [&](const Delta& x) { return x.var == it.key(); });
    if (d == o.deltas.end() || !value_matches(d->after, it.value(), e.value("valueTol", 1e-9))) return false;
  }
  for (const auto& v : e.value("changes", json::array()))
    if (std::none_of(o.deltas.begin(), o.deltas.end(), [&](const Delta& x) { return x.var == v.get<std::string>(); }))
      return false;
  for (auto it = field(e, "bindings").begin(); it != field(e, "bindings").end(); ++it) {
    auto b = o.bindings.find(it.key());
    if (b == o.bindings.end() || !value_matches(b->second, it.value(), 1e-12)) return false;
  }
  return true;
}

std::string describe(const EventOccurrence& o) {
  std::string s = o.name + "@" + format_real(o.t);
  for (const auto& d : o.deltas) s += " " + d.var + "=" + value_to_json(d.after);
  return s;
}

// run: simulate a project and compare occurrences, states and violations.
void run_run(const fs::path& dir, const json& f, Report& r) {
  const ParseResult pr = parse_project_dir(resolve_paths(dir, f));
  if (has_errors(pr.diagnostics)) {
    r.note("project does not parse: " + format_diagnostic(pr.diagnostics[0]));
    return;
  }
  const auto er = elaborate(pr.constructs, {f.value("autoPliTrue", false)});
  if (!er.ok()) {
    r.note("project does not elaborate: " + format_diagnostic(er.diagnostics[0]));
    return;
  }
  ScenarioBindings scenario;
  if (f.contains("scenario")) scenario = load_scenario((dir / f.at("scenario").get<std::string>()).string());
  RunConfig cfg;
  cfg.seed = f.value("seed", std::uint64_t{42});
  cfg.horizon = f.value("horizon", 79.9);
  cfg.monitor = f.value("monitor", true);
  for (const auto& fault : f.value("faults", json::array()))
    cfg.faults.push_back({fault.at("t"), fault.at("var"), value_from_json(fault.at("value").dump())});
  const json& ex = f.at("expect");

  Simulator sim(er.project, cfg, scenario);
  sim.init_run();
  std::vector<Violation> handover;
  const json hv = f.value("handoverAt", json::object());
  bool handoverDone = hv.empty();
  auto check_handover = [&] {
    if (!handoverDone && sim.now() >= hv.at("t").get<double>()) {
      handover = sim.check_handover(hv.at("machines").get<std::vector<std::string>>());
      handoverDone = true;
    }
  };
  check_handover();
  while (sim.advance()) check_handover();
  check_handover();
  const RunResult res = sim.result();

  if (ex.contains("status")) {
    const std::string st = res.status == RunStatus::Completed ? "completed" : "aborted";
    if (st != ex.at("status").get<std::string>()) r.mismatch("status", ex.at("status").dump(), st + " " + res.abortCode);
  }
  if (ex.contains("abortCode") && res.abortCode != ex.at("abortCode").get<std::string>())
    r.mismatch("abort code", ex.at("abortCode").dump(), res.abortCode + " (" + res.abortMessage + ")");
  if (ex.contains("violations")) {
    std::set<std::string> codes;
    for (const auto& v : res.violations) codes.insert(v.code);
    expect_set(r, "violation codes", string_set(ex.at("violations")), codes);
  }
  if (ex.contains("handover")) {
    std::set<std::string> codes;
    for (const auto& v : handover) codes.insert(v.code);
    expect_set(r, "handover codes", string_set(ex.at("handover")), codes);
  }
  for (const auto& e : ex.value("events", json::array())) {
    const bool found = std::any_of(res.occurrences.begin(), res.occurrences.end(),
                                   [&](const EventOccurrence& o) { return event_matches(o, e); });
    if (!found) {
      std::string near;
      for (const auto& o : res.occurrences)
        if (o.name == e.at("event") || std::count(o.members.begin(), o.members.end(), e.at("event").get<std::string>()))
          near += "\n    " + describe(o);
      r.mismatch("occurrence", e.dump(), near.empty() ? "no occurrence of that event" : near);
    }
  }
  for (const auto& e : ex.value("eventTimes", json::array())) {
    std::vector<double> ts;
    for (const auto& o : res.occurrences)
      if (o.name == e.at("event").get<std::string>()) ts.push_back(o.t);
    json got = ts;
    if (!json_close(got, e.at("times"), e.value("tol", 0.0)))
      r.mismatch(e.at("event").get<std::string>() + " times", e.at("times").dump(), got.dump());
  }
  for (const auto& sa : ex.value("stateAt", json::array())) {
    const double t = sa.at("t");
    const auto s = state_at(res.trace, t);
    for (auto it = field(sa, "equal").begin(); it != field(sa, "equal").end(); ++it) {
      auto v = s.find(it.key());
      if (v == s.end() || !value_matches(v->second, it.value(), sa.value("tol", 1e-9)))
        r.mismatch(it.key() + " at t=" + format_real(t), it.value().dump(),
                   v == s.end() ? "absent" : value_to_json(v->second));
    }
    for (const auto& pair : sa.value("differ", json::array())) {
      auto a = s.find(pair.at(0)), b = s.find(pair.at(1));
      if (a == s.end() || b == s.end() || a->second == b->second)
        r.note(pair.dump() + " expected to differ at t=" + format_real(t));
    }
  }
  if (ex.contains("finalPliant")) {
    for (auto it = ex.at("finalPliant").begin(); it != ex.at("finalPliant").end(); ++it) {
      auto a = res.activePliant.find(it.key());
      const std::string got = a == res.activePliant.end() ? "" : a->second;
      if (got != it.value().get<std::string>()) r.mismatch("pliant event of " + it.key(), it.value().dump(), got);
    }
  }
  if (ex.contains("finalModes")) {
    // Every "<Machine>.mode" must hold the given literal, whatever set it
    // belongs to (instances rename their state sets).
    const std::string want = ex.at("finalModes").get<std::string>();
    for (const auto& m : er.project.machines) {
      const auto* v = res.finalState.lookup(m.name + ".mode");
      if (v && (v->kind() != ValueKind::Enum || v->enum_literal() != want))
        r.mismatch(m.name + ".mode at horizon", want, value_to_json(*v));
    }
  }
  for (auto it = field(ex, "finalState").begin(); it != field(ex, "finalState").end(); ++it) {
    const auto* v = res.finalState.lookup(it.key());
    if (!v || !value_matches(*v, it.value(), ex.value("finalTol", 1e-9)))
      r.mismatch("final " + it.key(), it.value().dump(), v ? value_to_json(*v) : "absent");
  }
}

std::string substitute(std::string s, const std::map<std::string, std::string>& vars) {
  for (const auto& [k, v] : vars) {
    const std::string key = "${" + k + "}";
    for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + v.size())) s.replace(pos, key.size(), v);
  }
  return s;
}

// cli: drives run_cli with ${dir}/${tmp} substituted into the arguments.
void run_cli_fixture(const fs::path& dir, const json& f, Report& r) {
  const fs::path tmp = fs::temp_directory_path() / ("hebfx-" + hex64(fnv1a64(fs::absolute(dir).string())));
  fs::create_directories(tmp);
  const std::map<std::string, std::string> vars{{"dir", fs::absolute(dir).lexically_normal().string()},
                                                {"tmp", tmp.string()}};
  std::vector<std::string> args;
  for (const auto& a : f.at("args")) args.push_back(substitute(a, vars));
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  const json& ex = f.at("expect");
  if (ex.contains("exit") && code != ex.at("exit").get<int>())
    r.mismatch("exit code", ex.at("exit").dump(), std::to_string(code) + "\n" + err.str());
  for (const auto& s : ex.value("stderrContains", json::array()))
    if (err.str().find(s.get<std::string>()) == std::string::npos) r.mismatch("stderr", "to contain " + s.dump(), err.str());
  for (const auto& s : ex.value("stdoutContains", json::array()))
    if (out.str().find(s.get<std::string>()) == std::string::npos) r.mismatch("stdout", "to contain " + s.dump(), out.str());
  if (ex.contains("traceRecords")) {
    const fs::path file = substitute(ex.at("traceFile").get<std::string>(), vars);
    Trace tr;
    try {
      tr = deserialize_jsonl(slurp(file));
    } catch (const std::exception& e) {
      r.note(std::string("trace unreadable: ") + e.what());
      return;
    }
    for (const auto& want : ex.at("traceRecords")) {
      const bool found = std::any_of(tr.records.begin(), tr.records.end(), [&](const TraceRecord& rec) {
        return record_kind_name(rec.kind) == want.value("kind", std::string("modeEvent")) && rec.event == want.at("event") &&
               (!want.contains("t") || rec.t == want.at("t").get<double>());
      });
      if (!found) r.mismatch("trace record", want.dump(), "none matching");
    }
  }
  fs::remove_all(tmp);
}

}  // namespace

FixtureResult run_fixture(const std::string& fixtureDir) {
  FixtureResult fr;
  const fs::path dir(fixtureDir);
  fr.path = fixtureDir;
  fr.name = dir.filename().string();
  Report r;
  try {
    const json f = json::parse(slurp(dir / "fixture.json"));
    fr.name = f.value("name", fr.name);
    fr.expectedFailure = f.contains("expectFailure");
    const std::string kind = f.at("kind");
    if (kind == "parse") run_parse(dir, f, r);
    else if (kind == "check") run_check(dir, f, r);
    else if (kind == "free-identifiers") run_free_identifiers(f, r);
    else if (kind == "eval") run_eval(f, r);
    else if (kind == "window") run_window(f, r);
    else if (kind == "next-window") run_next_window(f, r);
    else if (kind == "calc-traj") run_calc_traj(f, r);
    else if (kind == "run") run_run(dir, f, r);
    else if (kind == "cli") run_cli_fixture(dir, f, r);
    else r.note("unknown fixture kind " + kind);
    if (fr.expectedFailure) r.diff.insert(r.diff.begin(), "expected failure: " + f.at("expectFailure").get<std::string>());
  } catch (const std::exception& e) {
    r.note(std::string("fixture error: ") + e.what());
  }
  const std::size_t noise = fr.expectedFailure ? 1 : 0;
  fr.passed = r.diff.size() == noise;
  fr.diff = std::move(r.diff);
  return fr;
}

std::vector<FixtureResult> run_fixtures(const std::string& root) {
  std::vector<std::string> dirs;
  std::error_code ec;
  if (fs::is_directory(root, ec))
    for (const auto& e : fs::recursive_directory_iterator(root, ec))
      if (e.is_regular_file() && e.path().filename() == "fixture.json") dirs.push_back(e.path().parent_path().string());
  std::sort(dirs.begin(), dirs.end());
  std::vector<FixtureResult> out;
  for (const auto& d : dirs) out.push_back(run_fixture(d));
  return out;
}

bool suite_ok(const std::vector<FixtureResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const FixtureResult& r) { return r.passed != r.expectedFailure; });
}

}  // namespace heb
