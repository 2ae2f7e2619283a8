#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "heb/scheduler.hpp"
#include "heb/trace.hpp"
#include "support.hpp"

namespace heb {
namespace {

using test::run_corpus;

const EventOccurrence* find_occ(const RunResult& r, const std::string& name, int nth = 1) {
  for (const auto& o : r.occurrences)
    if ((o.name == name || std::count(o.members.begin(), o.members.end(), name)) && --nth == 0) return &o;
  return nullptr;
}

const Delta* find_delta(const EventOccurrence& o, const std::string& var) {
  for (const auto& d : o.deltas)
    if (d.var == var) return &d;
  return nullptr;
}

Value hazard(const std::string& tag, double x, double y, double sz, double ht) {
  Value v = Value::enum_lit("HAZTYPE", tag);
  for (double c : {x, y, sz, ht}) v = Value::pair(v, Value::real(c));
  return v;
}

TEST(Scheduler, InitLeavesEveryoneIdle) {
  Simulator sim(test::corpus(), RunConfig{}, load_scenario(test::default_scenario()));
  sim.init_run();
  EXPECT_EQ(sim.now(), 0.0);
  const Valuation& s = sim.state();
  for (const auto& m : test::corpus().machines) {
    if (m.name == "EnvironmentScenario_Mch") continue;  // no mode variable
    const Value* mode = s.lookup(m.name + ".mode");
    ASSERT_TRUE(mode) << m.name;
    ASSERT_EQ(mode->kind(), ValueKind::Enum);
    EXPECT_EQ(mode->enum_literal(), "OFF") << m.name;
  }
  EXPECT_EQ(*s.lookup("hazards"), Value::set({}));
  const RunResult r = sim.result();
  for (const auto& m : test::corpus().machines) EXPECT_EQ(r.activePliant.at(m.name), "PliTrue") << m.name;
}

TEST(Scheduler, IdleMachineRunsToHorizon) {
  const auto er = test::elaborate_text(R"(MACHINE Idle
  VARIABLES u
  INVARIANTS
    u : ℝ
  EVENTS
    INITIALISATION
      STATUS ordinary
      BEGIN
        u := 0
      END
    PliTrue
      STATUS pliant
      COMPLY INVARIANTS
      END
END
)");
  ASSERT_TRUE(er.ok());
  RunConfig cfg;
  cfg.horizon = 3.0;
  const RunResult r = run_to_horizon(er.project, cfg);
  EXPECT_EQ(r.status, RunStatus::Completed);
  EXPECT_TRUE(r.occurrences.empty());
  EXPECT_EQ(r.endTime, 3.0);
}

TEST(Scheduler, NoPliantSuccessorAtStart) {
  const auto er = test::elaborate_text(R"(CONTEXT Sw
  SETS ONOFF
  CONSTANTS ON , OFF
  AXIOMS
    partition(ONOFF, {ON}, {OFF})
END

MACHINE Lamp
  SEES Sw
  VARIABLES mode
  INVARIANTS
    mode : ONOFF
  EVENTS
    INITIALISATION
      STATUS ordinary
      BEGIN
        mode := OFF
      END
    Glow
      STATUS pliant
      WHEN mode = ON
      COMPLY INVARIANTS
      END
END
)");
  ASSERT_TRUE(er.ok());
  const RunResult r = run_to_horizon(er.project, RunConfig{});
  EXPECT_EQ(r.status, RunStatus::Aborted);
  EXPECT_EQ(r.abortCode, "no-pliant-successor");
  EXPECT_EQ(r.exit_code(), 4);
}

TEST(Scheduler, AddHazardAtTwelve) {
  const RunResult r = run_corpus(12.5);
  const auto* add = find_occ(r, "AddHazard");
  ASSERT_TRUE(add);
  EXPECT_EQ(add->t, 12.0);
  const Delta* h = find_delta(*add, "hazards");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->after, Value::set({hazard("CYL", 5, 8, 1.5, 3)}));
  const Delta* s = find_delta(*add, "EnvironmentScenario_Mch.schedule");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->after, Value::seq({Value::integer(30), Value::integer(55)}));
}

TEST(Scheduler, HorizonMustBePositive) {
  RunConfig cfg;
  cfg.horizon = 0.0;
  EXPECT_THROW(Simulator(test::corpus(), cfg), std::invalid_argument);
}

TEST(Scheduler, ActivateDrone1IsOneOccurrence) {
  const RunResult r = run_corpus(0.05);
  const auto* o = find_occ(r, "ActivateDrone1");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->members, (std::vector<std::string>{"Controller_Mch.LaunchDrone1", "Drone1_Mch.Activate1"}));
  const Delta* mode = find_delta(*o, "Drone1_Mch.mode");
  ASSERT_TRUE(mode);
  EXPECT_EQ(mode->after, Value::enum_lit("DRONESTATE1", "SEEK"));
  const Delta* cmd = find_delta(*o, "Controller_Mch.drones2comd");
  ASSERT_TRUE(cmd);
  EXPECT_FALSE(cmd->after.contains(Value::integer(1)));
  EXPECT_TRUE(cmd->before->contains(Value::integer(1)));
  EXPECT_TRUE(find_delta(*o, "Drone1_Mch.trajectory"));
  EXPECT_EQ(*r.finalState.lookup("drhazards"), *r.finalState.lookup("hazards"));
}

TEST(Scheduler, EmptySynchLeavesStateAlone) {
  const auto er = test::elaborate_text(R"(MACHINE A
  TIME t
  VARIABLES a
  INVARIANTS
    a : ℝ
  EVENTS
    INITIALISATION
      STATUS ordinary
      BEGIN
        a := 1
      END
    PliTrue
      STATUS pliant
      COMPLY INVARIANTS
      END
    Ping
      STATUS asynch
      WHEN 0 < t < 1
      END
END

MACHINE B
  VARIABLES b
  INVARIANTS
    b : ℝ
  EVENTS
    INITIALISATION
      STATUS ordinary
      BEGIN
        b := 2
      END
    PliTrue
      STATUS pliant
      COMPLY INVARIANTS
      END
    Pong
      STATUS asynch
      WHEN b = 2
      END
END

PROJECT P
  MACHINE A
  MACHINE B
  SYNCH Both
      A.Ping
      B.Pong
    END
END
)");
  ASSERT_TRUE(er.ok()) << format_diagnostic(er.diagnostics.front());
  RunConfig cfg;
  cfg.horizon = 2.0;
  const RunResult r = run_to_horizon(er.project, cfg);
  ASSERT_EQ(r.status, RunStatus::Completed) << r.abortCode << " " << r.abortMessage;
  ASSERT_EQ(r.occurrences.size(), 1u);
  EXPECT_EQ(r.occurrences[0].name, "Both");
  EXPECT_TRUE(r.occurrences[0].deltas.empty());
  EXPECT_EQ(*r.finalState.lookup("A.a"), Value::integer(1));
  EXPECT_EQ(*r.finalState.lookup("B.b"), Value::integer(2));
}

TEST(Scheduler, MixedKindHandoverAborts) {
  const auto er = test::elaborate_text(R"(CONTEXT Sw
  SETS ONOFF
  CONSTANTS ON , OFF
  AXIOMS
    partition(ONOFF, {ON}, {OFF})
END

MACHINE Lamp
  SEES Sw
  TIME t
  VARIABLES mode
  INVARIANTS
    mode : ONOFF
  EVENTS
    INITIALISATION
      STATUS ordinary
      BEGIN
        mode := OFF
      END
    Dark
      STATUS pliant
      WHEN mode = OFF
      COMPLY INVARIANTS
      END
    Flip
      STATUS ordinary
      WHEN mode = OFF ∧ t = 1
      THEN mode := ON
      END
END
)");
  ASSERT_TRUE(er.ok());
  const RunResult r = run_to_horizon(er.project, RunConfig{});
  EXPECT_EQ(r.status, RunStatus::Aborted);
  EXPECT_EQ(r.abortCode, "no-successor");
  EXPECT_EQ(r.endTime, 1.0);
}

TEST(Scheduler, MissingBindingAborts) {
  ScenarioBindings sc = load_scenario(test::default_scenario());
  sc.entries.erase(std::remove_if(sc.entries.begin(), sc.entries.end(),
                                  [](const ScenarioEntry& e) { return e.event == "AddHazard" && e.occurrence == 2; }),
                   sc.entries.end());
  RunConfig cfg;
  const RunResult r = run_to_horizon(test::corpus(), cfg, sc);
  EXPECT_EQ(r.status, RunStatus::Aborted);
  EXPECT_EQ(r.abortCode, "unbound-any");
}

TEST(Scheduler, SameSeedSameTrace) {
  const RunResult a = run_corpus(40.0, 7), b = run_corpus(40.0, 7);
  EXPECT_EQ(serialize_jsonl(a.trace), serialize_jsonl(b.trace));
}

// Per machine, occurrences advance strictly in (t, microStep).
TEST(Scheduler, IntervalPartitionPerMachine) {
  const RunResult r = run_corpus(79.9);
  std::map<std::string, std::pair<double, int>> last;
  for (const auto& o : r.occurrences)
    for (const auto& m : o.machines) {
      auto it = last.find(m);
      if (it != last.end()) EXPECT_LT(it->second, std::make_pair(o.t, o.microStep)) << m << " at " << o.t;
      last[m] = {o.t, o.microStep};
    }
}

// Samples only ever carry pliant variables: mode variables are frozen
// during episodes.
TEST(Scheduler, FrameRuleHoldsInSamples) {
  const RunResult r = run_corpus(20.0);
  const auto& p = test::corpus();
  int samples = 0;
  for (const auto& rec : r.trace.records) {
    if (rec.kind != RecordKind::Sample) continue;
    ++samples;
    for (const auto& d : rec.deltas) {
      const VarDecl* v = p.find_var(d.var);
      ASSERT_TRUE(v) << d.var;
      EXPECT_EQ(v->kind, VarKind::Pliant) << d.var;
    }
  }
  EXPECT_GT(samples, 100);
}

// Names fired in each controller window, keyed by the window start.
std::map<long, std::set<std::string>> window_sets(const RunResult& r) {
  std::map<long, std::set<std::string>> out;
  for (const auto& o : r.occurrences) {
    if (o.name == "AddHazard" || o.name == "TakeHazard") continue;
    if (o.t > 79.6) out[-1].insert(o.name);
    else out[static_cast<long>(std::floor(o.t))].insert(o.name);
  }
  return out;
}

TEST(Scheduler, WindowEventSetsIgnoreSeed) {
  const auto reference = window_sets(run_corpus(79.9, 42));
  EXPECT_EQ(reference.at(0).size(), 7u);  // controller, two drones, three responders, monitoring start
  for (std::uint64_t seed = 1; seed <= 5; ++seed) EXPECT_EQ(window_sets(run_corpus(79.9, seed)), reference) << seed;
}

TEST(Scheduler, UniformPolicyStaysInsideWindows) {
  RunConfig cfg;
  cfg.seed = 3;
  cfg.policy = AsynchPolicy::UniformInWindow;
  const RunResult r = run_to_horizon(test::corpus(), cfg, load_scenario(test::default_scenario()));
  ASSERT_EQ(r.status, RunStatus::Completed) << r.abortCode;
  const auto* act = find_occ(r, "ActivateController");
  ASSERT_TRUE(act);
  EXPECT_GT(act->t, 0.0);
  EXPECT_LT(act->t, 0.1);
  const auto* end = find_occ(r, "EndMonitoring");
  ASSERT_TRUE(end);
  EXPECT_GT(end->t, 79.7);
  EXPECT_LT(end->t, 79.8);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Scheduler, HandoverCleanAcrossSeeds) {
  std::vector<std::string> machines;
  for (const auto& m : test::corpus().machines) machines.push_back(m.name);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    Simulator sim(test::corpus(), cfg, load_scenario(test::default_scenario()));
    sim.init_run();
    std::size_t bad = sim.check_handover(machines).size();
    while (sim.advance()) bad += sim.check_handover(machines).size();
    EXPECT_EQ(bad, 0u) << "seed " << seed;
  }
}

TEST(Scheduler, HandoverAfterAddHazard) {
  Simulator sim(test::corpus(), RunConfig{}, load_scenario(test::default_scenario()));
  sim.init_run();
  while (sim.now() < 12.0 && sim.advance()) {
  }
  ASSERT_EQ(sim.now(), 12.0);
  EXPECT_TRUE(sim.check_handover({"EnvironmentScenario_Mch"}).empty());
}

// Every ordering of AddNode is a permutation of NSet; the reachable states
// are exactly its subsets and the only terminal one is the full set.
TEST(Scheduler, NodesMatchesInterleavingOracle) {
  const ElaborationResult er = test::elaborate_paths({test::nodes_dir()}, true);
  ASSERT_TRUE(er.ok());
  std::vector<std::string> lits{"aa", "bb", "cc", "dd"};
  std::set<std::set<std::string>> oracleStates;
  std::set<std::set<std::string>> oracleTerminal;
  std::sort(lits.begin(), lits.end());
  do {
    std::set<std::string> s;
    oracleStates.insert(s);
    for (const auto& l : lits) {
      s.insert(l);
      oracleStates.insert(s);
    }
    oracleTerminal.insert(s);
  } while (std::next_permutation(lits.begin(), lits.end()));
  ASSERT_EQ(oracleStates.size(), 16u);

  std::set<std::set<std::string>> seenStates, seenTerminal;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.horizon = 1.0;
    const RunResult r = run_to_horizon(er.project, cfg);
    ASSERT_EQ(r.status, RunStatus::Completed);
    seenStates.insert(std::set<std::string>{});
    for (const auto& o : r.occurrences) {
      std::set<std::string> s;
      for (const auto& x : o.deltas.at(0).after.items()) s.insert(x.enum_literal());
      seenStates.insert(s);
    }
    std::set<std::string> fin;
    for (const auto& x : r.finalState.lookup("Nodes.nod")->items()) fin.insert(x.enum_literal());
    seenTerminal.insert(fin);
  }
  EXPECT_EQ(seenTerminal, oracleTerminal);
  EXPECT_EQ(seenStates, oracleStates);
}

}  // namespace
}  // namespace heb
