// Acceptance run for the incident-response corpus and the Nodes example.
// Prints one PASS/FAIL line per criterion.  Exit status is 0 when the set of
// failing criteria equals the set named with --expect-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "heb/cli.hpp"
#include "heb/elaborate.hpp"
#include "heb/monitor.hpp"
#include "heb/ode.hpp"
#include "heb/parser.hpp"
#include "heb/scenario.hpp"
#include "heb/scheduler.hpp"
#include "heb/trace.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace heb;

namespace {

const std::string kSrc = HEB_SOURCE_DIR;
const std::string kCorpus = kSrc + "/corpus/incident_response";
const std::string kScenario = kCorpus + "/scenario.default.json";
const std::string kNodes = kSrc + "/corpus/nodes";
const std::string kFixtures = kSrc + "/fixtures";

constexpr double kHorizon = 79.9;
constexpr double kWindow = 0.1;
const std::vector<double> kHazardTimes{12.0, 30.0, 55.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(9);
  os << x;
  return os.str();
}

const ElaboratedProject& corpus() {
  static const ElaborationResult er = [] {
    const ParseResult pr = parse_project_dir({kCorpus});
    return elaborate(pr.constructs, {});
  }();
  return er.project;
}

RunConfig config(std::uint64_t seed, double horizon = kHorizon) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.horizon = horizon;
  return cfg;
}

RunResult run_corpus(std::uint64_t seed, double horizon = kHorizon, std::vector<Fault> faults = {}) {
  RunConfig cfg = config(seed, horizon);
  cfg.faults = std::move(faults);
  return run_to_horizon(corpus(), cfg, load_scenario(kScenario));
}

// 1. Parse and check the corpus.
Outcome parse_and_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Diagnostics collect;
  const auto files = collect_source_files({kCorpus}, collect);
  const LoadedProject lp = load_project({kCorpus});
  std::size_t errors = error_codes(lp.parse.diagnostics).size();
  if (!has_errors(lp.parse.diagnostics)) {
    errors += error_codes(lp.elab.diagnostics).size();
    if (lp.elab.ok()) errors += error_codes(feasibility_scan(lp.elab.project)).size();
  }
  const double secs = seconds_since(t0);
  const auto& p = lp.elab.project;
  std::set<std::string> names;
  for (const auto& m : p.machines) names.insert(m.name);
  const std::set<std::string> want{"Controller_Mch", "EnvironmentScenario_Mch", "Drone1_Mch", "Drone2_Mch",
                                   "Responder1_Mch", "Responder2_Mch", "Responder3_Mch"};
  Outcome o;
  o.pass = files.size() >= 10 && names == want && p.synchGroups.size() >= 15 && errors == 0 && secs < 1.0;
  o.detail = std::to_string(files.size()) + " files, " + std::to_string(names.size()) + " machines, " +
             std::to_string(p.synchGroups.size()) + " synch groups, " + std::to_string(errors) + " errors, " +
             num(secs) + " s";
  return o;
}

// 2. Full run: every agent back in OFF, nothing violated, within budget.
Outcome full_run() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> machines;
  for (const auto& m : corpus().machines) machines.push_back(m.name);
  Simulator sim(corpus(), config(42), load_scenario(kScenario));
  sim.init_run();
  std::size_t handover = sim.check_handover(machines).size();
  while (sim.advance()) handover += sim.check_handover(machines).size();
  const RunResult r = sim.result();
  const double secs = seconds_since(t0);

  std::vector<std::string> notOff;
  for (const auto& m : machines) {
    const Value* mode = r.finalState.lookup(m + ".mode");
    if (!mode) continue;  // the environment has no mode
    if (mode->enum_literal() != "OFF") notOff.push_back(m + "=" + mode->enum_literal());
  }
  Outcome o;
  o.pass = r.status == RunStatus::Completed && notOff.empty() && r.violations.empty() && handover == 0 && secs < 30.0;
  o.detail = std::string(r.status == RunStatus::Completed ? "completed" : "aborted " + r.abortCode) + ", " +
             std::to_string(r.violations.size()) + " violations, " + std::to_string(handover) +
             " handover violations, " + num(secs) + " s";
  if (!notOff.empty()) {
    o.detail += ", not OFF:";
    for (const auto& s : notOff) o.detail += " " + s;
  }
  return o;
}

// 3. Environment events fire exactly at the scheduled instants.
Outcome hazard_timing() {
  const RunResult r = run_corpus(42);
  std::vector<double> times;
  for (const auto& occ : r.occurrences)
    if (occ.name == "AddHazard" || occ.name == "TakeHazard") times.push_back(occ.t);
  Outcome o;
  o.pass = times == kHazardTimes;
  o.detail = "times:";
  for (double t : times) o.detail += " " + format_real(t);
  return o;
}

// 4. Hazard copies agree outside the update windows; a desynchronised copy
// is caught within one sample step.
bool inside_update_window(double t) {
  for (double s : kHazardTimes)
    if (t >= s && t <= s + kWindow) return true;
  return false;
}

Outcome global_invariant() {
  const auto& p = corpus();
  const RunResult r = run_corpus(42);

  // Piecewise-constant reconstruction of the discrete state from the trace.
  std::vector<std::pair<double, Valuation>> timeline;
  Valuation cur = p.constants;
  for (const auto& rec : r.trace.records) {
    if (rec.kind != RecordKind::Header && rec.kind != RecordKind::ModeEvent) continue;
    for (const auto& d : rec.deltas) cur.set(d.var, d.after);
    if (!timeline.empty() && timeline.back().first == rec.t) timeline.back().second = cur;
    else timeline.emplace_back(rec.t, cur);
  }
  auto state_at = [&](double t) -> const Valuation& {
    auto it = std::upper_bound(timeline.begin(), timeline.end(), t,
                               [](double x, const auto& e) { return x < e.first; });
    return std::prev(it)->second;
  };

  std::vector<double> points;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, kHorizon);
  for (int i = 0; i < 10000; ++i) points.push_back(u(rng));
  for (const auto& occ : r.occurrences)
    for (double dt : {-1e-9, 0.0, 1e-9}) points.push_back(std::clamp(occ.t + dt, 0.0, kHorizon));
  for (double s : kHazardTimes)
    for (double t : {s, s + kWindow, std::nextafter(s + kWindow, 100.0)}) points.push_back(t);

  const std::vector<std::string> copies{"Controller_Mch.ctrhazards", "drhazards", "resp1hazards", "resp2hazards", "resp3hazards"};
  Monitor mon(p);
  int checked = 0, disagree = 0, monitorDisagree = 0;
  for (double t : points) {
    const Valuation& v = state_at(t);
    const bool enforced = !inside_update_window(t);
    bool agree = true;
    for (const auto& c : copies) {
      const Value* x = v.lookup(c);
      if (!x) return {false, "no variable " + c + " in the state"};
      agree = agree && *x == *v.lookup("hazards");
    }
    if (enforced) {
      ++checked;
      if (!agree) ++disagree;
    }
    // The monitor reports a violation exactly when the oracle says so.
    if (mon.check_global(v, t).empty() != (!enforced || agree)) ++monitorDisagree;
  }

  const RunResult faulty = run_corpus(42, 14.0, {Fault{13.0, "drhazards", Value::set({})}});
  double detectedAt = -1.0;
  for (const auto& vi : faulty.violations)
    if (vi.code == "global-invariant-violation") {
      detectedAt = vi.t;
      break;
    }
  const double latency = detectedAt - 13.0;

  Outcome o;
  o.pass = disagree == 0 && monitorDisagree == 0 && r.violations.empty() && detectedAt >= 13.0 && latency <= 0.05;
  o.detail = std::to_string(checked) + " enforced points, " + std::to_string(disagree) + " disagreements, " +
             std::to_string(monitorDisagree) + " monitor mismatches, fault detected after " +
             (detectedAt < 0 ? std::string("never") : num(latency) + " s");
  return o;
}

// 5. Integrator accuracy against closed forms.
Outcome ode_accuracy() {
  // The Navigate flow anchored at the segment start covers any segment in 1/v.
  OdeSystem nav;
  nav.stateVars = {"drx", "dry", "drz"};
  nav.rhs = {parse_expression("v × (wx − thex)"), parse_expression("v × (wy − they)"),
             parse_expression("v × (wz − thez)")};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-30.0, 30.0), alt(0.0, 8.0), vel(0.2, 3.0);
  double worstRel = 0.0;
  int segments = 0;
  while (segments < 100) {
    const double a[3] = {pos(rng), pos(rng), alt(rng)}, b[3] = {pos(rng), pos(rng), alt(rng)}, v = vel(rng);
    int lead = 0;
    for (int k = 1; k < 3; ++k)
      if (std::fabs(b[k] - a[k]) > std::fabs(b[lead] - a[lead])) lead = k;
    if (std::fabs(b[lead] - a[lead]) < 1e-3) continue;
    Valuation s;
    const char* state[3] = {"drx", "dry", "drz"};
    const char* anchor[3] = {"thex", "they", "thez"};
    const char* target[3] = {"wx", "wy", "wz"};
    for (int k = 0; k < 3; ++k) {
      s.set(state[k], Value::real(a[k]));
      s.set(anchor[k], Value::real(a[k]));
      s.set(target[k], Value::real(b[k]));
    }
    s.set("v", Value::real(v));
    const std::string guard = std::string(state[lead]) + " = " + target[lead];
    const auto r = integrate_episode(nav, s, 0.0, {{"arrive", parse_expression(guard)}}, 20.0, {}, false);
    if (r.cause != Termination::GuardCrossing) return {false, "segment " + std::to_string(segments) + " never arrived"};
    worstRel = std::max(worstRel, std::fabs(r.endTime - 1.0 / v) * v);
    ++segments;
  }

  // Linear residuals: both the bisection and a full episode land on the root.
  std::uniform_real_distribution<double> slope(0.1, 10.0), root(0.01, 50.0);
  OdeSystem lin;
  lin.stateVars = {"x"};
  lin.rhs = {parse_expression("k")};
  double worstAbs = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double k = slope(rng), t0 = root(rng);
    const double tb = locate_crossing([&](double t) { return k * (t - t0) >= 0; }, 0.0, t0 + 1.0, 1e-10);
    worstAbs = std::max(worstAbs, std::fabs(tb - t0));
    if (i < 100) {
      Valuation s;
      s.set("x", Value::real(0.0));
      s.set("k", Value::real(k));
      s.set("c", Value::real(k * t0));
      const auto r = integrate_episode(lin, s, 0.0, {{"c", parse_expression("x ≥ c")}}, t0 + 1.0, {}, false);
      worstAbs = std::max(worstAbs, std::fabs(r.endTime - t0));
    }
  }
  Outcome o;
  o.pass = worstRel <= 1e-6 && worstAbs <= 1e-9;
  o.detail = "worst traversal rel. error " + num(worstRel) + ", worst crossing error " + num(worstAbs) + " s";
  return o;
}

// 6. Nodes against brute-force enumeration of AddNode orders.
Outcome nodes_oracle() {
  const ParseResult pr = parse_project_dir({kNodes});
  const ElaborationResult er = elaborate(pr.constructs, {true});
  if (!er.ok()) return {false, "Nodes does not elaborate"};

  using State = std::set<std::string>;
  std::set<State> oracleStates, oracleTerminal;
  std::vector<std::string> order{"aa", "bb", "cc", "dd"};
  do {
    State s;
    oracleStates.insert(s);
    for (const auto& n : order) oracleStates.insert((s.insert(n), s));
    oracleTerminal.insert(s);
  } while (std::next_permutation(order.begin(), order.end()));

  std::set<State> states, terminal;
  std::set<std::vector<std::string>> orders;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const RunResult r = run_to_horizon(er.project, config(seed, 1.0));
    if (r.status != RunStatus::Completed) return {false, "seed " + std::to_string(seed) + " aborted " + r.abortCode};
    State s;
    states.insert(s);
    std::vector<std::string> seq;
    for (const auto& occ : r.occurrences) {
      for (const auto& [k, v] : occ.bindings) seq.push_back(v.enum_literal());
      for (const auto& d : occ.deltas)
        if (d.var == "Nodes.nod") {
          s.clear();
          for (const auto& x : d.after.items()) s.insert(x.enum_literal());
          states.insert(s);
        }
    }
    orders.insert(seq);
    State fin;
    for (const auto& x : r.finalState.lookup("Nodes.nod")->items()) fin.insert(x.enum_literal());
    terminal.insert(fin);
  }
  Outcome o;
  o.pass = terminal == oracleTerminal && states == oracleStates && oracleStates.size() == 16;
  o.detail = std::to_string(states.size()) + "/" + std::to_string(oracleStates.size()) + " states, " +
             std::to_string(terminal.size()) + " terminal, " + std::to_string(orders.size()) + " distinct orders";
  return o;
}

// 7. Identical flags give identical bytes; the seed only reorders inside windows.
std::map<std::string, std::set<std::string>> window_sets(const RunResult& r) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& occ : r.occurrences) {
    if (occ.name == "AddHazard" || occ.name == "TakeHazard") continue;
    std::string key;
    if (occ.t < kWindow) key = "launch";
    else if (occ.t > 79.7) key = "recall";
    else key = "cycle " + std::to_string(static_cast<long>(std::floor(occ.t)));
    out[key].insert(occ.name);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "heb_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  int codes = 0;
  for (const char* name : {"a", "b"})
    codes += run_cli({"run", "--project", kCorpus, "--scenario", kScenario, "--seed", "42", "--horizon", "79.9",
                      "--check-invariants", "--out", (dir / name).string()},
                     sink, sink);
  const std::string a = slurp(dir / "a.trace.jsonl"), b = slurp(dir / "b.trace.jsonl");
  const bool same = codes == 0 && !a.empty() && a == b;

  const auto reference = window_sets(run_corpus(42));
  int differing = 0;
  std::set<std::string> orderings;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RunResult r = run_corpus(seed);
    if (window_sets(r) != reference) ++differing;
    std::string launch;
    for (const auto& occ : r.occurrences)
      if (occ.t < kWindow) launch += occ.name + ",";
    orderings.insert(launch);
  }
  fs::remove_all(dir);
  Outcome o;
  o.pass = same && differing == 0 && reference.count("launch") && reference.count("recall");
  o.detail = std::string(same ? "traces identical" : "traces differ") + " (" + std::to_string(a.size()) +
             " bytes), " + std::to_string(differing) + "/20 seeds change a window set, " +
             std::to_string(orderings.size()) + " distinct launch orders";
  return o;
}

// 8. One negative input per diagnostic, each yielding exactly its code.
Outcome negative_battery() {
  struct Case {
    std::string fixture;
    std::string code;
  };
  const std::vector<Case> cases{
      {"elaborator/write-via-reads", "write-via-reads"},
      {"elaborator/tIIi-outside-interface", "tIIi-outside-interface"},
      {"elaborator/synch-write-conflict", "synch-write-conflict"},
      {"parser/missing-end", "missing-end"},
      {"parser/duplicate-name", "duplicate-name"},
      {"scheduler/no-pliant-successor", "no-pliant-successor"},
      {"scheduler/unbound-any-missing-second-hazard", "unbound-any"},
      {"elaborator/theorem-failure-short-duration", "theorem-failure"},
      {"elaborator/renaming-collision", "renaming-collision"},
      {"scheduler/no-successor-mixed-handover", "no-successor"},
      {"parser/duplicate-clause", "duplicate-clause"},
      {"elaborator/unknown-builtin", "unknown-builtin"},
  };
  int ok = 0;
  std::string bad;
  for (const auto& c : cases) {
    const fs::path dir = fs::path(kFixtures) / c.fixture;
    nlohmann::json f;
    std::ifstream(dir / "fixture.json") >> f;
    // Inputs are either files next to the fixture or inline text.
    ParseResult pr;
    if (f.contains("text")) {
      SourceUnit u{"inline.heb", f.at("text").get<std::string>(), {}};
      pr = parse_unit(u);
    } else {
      std::vector<std::string> sources;
      for (const auto& s : f.at("sources")) sources.push_back((dir / s.get<std::string>()).lexically_normal().string());
      pr = parse_project_dir(sources);
    }

    std::set<std::string> got;
    for (const auto& code : error_codes(pr.diagnostics)) got.insert(code);
    if (got.empty()) {
      const ElaborationResult er = elaborate(pr.constructs, {f.value("autoPliTrue", false)});
      for (const auto& code : error_codes(er.diagnostics)) got.insert(code);
      if (got.empty()) {
        RunConfig cfg = config(f.value("seed", std::uint64_t{42}), f.value("horizon", kHorizon));
        ScenarioBindings scen;
        if (f.contains("scenario")) scen = load_scenario((dir / f.at("scenario").get<std::string>()).string());
        const RunResult r = run_to_horizon(er.project, cfg, scen);
        if (r.status == RunStatus::Aborted) got.insert(r.abortCode);
      }
    }
    if (got == std::set<std::string>{c.code}) {
      ++ok;
    } else {
      bad += " " + c.code + "->{";
      for (const auto& g : got) bad += g + ";";
      bad += "}";
    }
  }
  Outcome o;
  o.pass = ok == static_cast<int>(cases.size()) && cases.size() >= 12;
  o.detail = std::to_string(ok) + "/" + std::to_string(cases.size()) + " produce exactly their code" + bad;
  return o;
}

// 9. Planned drone routes avoid inflated footprints; hovering drones keep apart.
struct Disc {
  double x, y, r;
};

std::vector<Disc> footprints(const Value& hazards) {
  std::vector<Disc> out;
  for (const auto& h : hazards.items()) {
    const auto f = h.flatten();  // shape, x, y, size, height
    const double size = f[3].as_real();
    const double radius = f[0].enum_literal() == "CYL" ? size : size * std::sqrt(2.0);
    out.push_back({f[1].as_real(), f[2].as_real(), radius + 0.5});
  }
  return out;
}

Outcome geometry() {
  Simulator sim(corpus(), config(42), load_scenario(kScenario));
  sim.init_run();
  std::map<int, Value> lastPlan;
  long samples = 0, inside = 0;
  int plans = 0;
  double minHover = std::numeric_limits<double>::infinity();
  int hoverChecks = 0;
  auto sweep = [&](const Valuation& v, int k) {
    const std::string m = "Drone" + std::to_string(k) + "_Mch";
    const Value* traj = v.lookup(m + ".trajectory");
    if (!traj || (lastPlan.count(k) && lastPlan.at(k) == *traj)) return;
    lastPlan[k] = *traj;
    if (traj->items().empty()) return;
    ++plans;
    const std::string d = "dr" + std::to_string(k);
    double px = v.lookup(d + "x")->as_real(), py = v.lookup(d + "y")->as_real();
    std::vector<Disc> discs;
    // A footprint that already contains the drone cannot be steered around.
    for (const auto& c : footprints(*v.lookup("drhazards")))
      if (std::hypot(px - c.x, py - c.y) > c.r) discs.push_back(c);
    for (const auto& wp : traj->items()) {
      const auto f = wp.flatten();
      const double qx = f[0].as_real(), qy = f[1].as_real();
      for (int i = 0; i <= 1000; ++i) {
        const double s = i / 1000.0, x = px + s * (qx - px), y = py + s * (qy - py);
        ++samples;
        for (const auto& c : discs)
          if (std::hypot(x - c.x, y - c.y) <= c.r) ++inside;
      }
      px = qx;
      py = qy;
    }
  };
  auto hover = [&](const Valuation& v) {
    for (int k = 1; k <= 2; ++k) {
      const std::string m = "Drone" + std::to_string(k) + "_Mch";
      if (v.lookup(m + ".mode")->enum_literal() != "SEEK" || !v.lookup(m + ".trajectory")->items().empty()) return;
    }
    const double dx = v.lookup("dr1x")->as_real() - v.lookup("dr2x")->as_real();
    const double dy = v.lookup("dr1y")->as_real() - v.lookup("dr2y")->as_real();
    minHover = std::min(minHover, std::hypot(dx, dy));
    ++hoverChecks;
  };
  do {
    sweep(sim.state(), 1);
    sweep(sim.state(), 2);
    hover(sim.state());
  } while (sim.advance());
  const RunResult r = sim.result();
  Outcome o;
  o.pass = plans > 0 && inside == 0 && hoverChecks > 0 && minHover >= 5.0 && r.plannerFallbacks == 0;
  o.detail = std::to_string(plans) + " plans, " + std::to_string(samples) + " samples, " + std::to_string(inside) +
             " inside a footprint, min hover separation " + num(minHover) + " m over " + std::to_string(hoverChecks) +
             " instants, " + std::to_string(r.plannerFallbacks) + " planner fallbacks";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> expectFail;
  app.add_option("--expect-fail", expectFail, "Criterion known to fail (repeatable)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"corpus parses and checks", parse_and_check},
      {"full run ends with every agent OFF and no violations", full_run},
      {"hazard events at exactly 12, 30, 55", hazard_timing},
      {"hazard copies agree outside update windows; fault caught", global_invariant},
      {"integrator traversal time and crossing accuracy", ode_accuracy},
      {"Nodes matches enumeration over 1000 seeds", nodes_oracle},
      {"byte-identical traces; window sets seed-invariant", determinism},
      {"negative battery yields exactly the expected codes", negative_battery},
      {"drone routes avoid footprints; hover separation", geometry},
  };

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  const std::set<int> expected(expectFail.begin(), expectFail.end());
  std::cout << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria pass";
  if (!expected.empty()) std::cout << (failed == expected ? "; failures match the expected set" : "; failures differ from the expected set");
  std::cout << std::endl;
  return failed == expected ? 0 : 1;
}
