#include <gtest/gtest.h>

#include <random>

#include "heb/monitor.hpp"
#include "heb/trace.hpp"
#include "support.hpp"

namespace heb {
namespace {

Valuation state_at(double t) {
  RunConfig cfg;
  cfg.horizon = t;
  Simulator sim(test::corpus(), cfg, load_scenario(test::default_scenario()));
  sim.init_run();
  while (sim.advance()) {
  }
  return sim.state();
}

TEST(Monitor, QuietBeforeFirstHazard) {
  const Valuation v = state_at(5.0);
  Monitor m(test::corpus());
  EXPECT_TRUE(m.check_point(v, 5.0, CheckPhase::Sample).empty());
}

TEST(Monitor, UpdateWindowToleratesDisagreement) {
  const Valuation v = state_at(12.05);
  ASSERT_NE(*v.lookup("hazards"), *v.lookup("drhazards"));
  Monitor m(test::corpus());
  EXPECT_TRUE(m.check_global(v, 12.05).empty());
  // The same disagreement outside the window is a violation.
  EXPECT_FALSE(m.check_global(v, 13.0).empty());
}

TEST(Monitor, DetectsDesynchronisedCopyWithinOneSample) {
  Fault f{13.0, "drhazards", Value::set({})};
  const RunResult r = test::run_corpus(14.0, 42, true, {f});
  ASSERT_FALSE(r.violations.empty());
  const Violation& v = r.violations.front();
  EXPECT_EQ(v.code, "global-invariant-violation");
  EXPECT_GE(v.t, 13.0);
  EXPECT_LE(v.t, 13.05);
  // The snapshot alone reproduces the failure.
  Valuation snap = test::corpus().constants;
  for (const auto& [k, x] : v.snapshot.values) snap.set(k, x);
  EXPECT_FALSE(Monitor(test::corpus()).check_global(snap, v.t).empty());
}

TEST(Monitor, WindowExamples) {
  const std::vector<double> sched{12, 30, 55};
  EXPECT_FALSE(check_global_invariant_window(sched, 0.1, 12.05));
  EXPECT_TRUE(check_global_invariant_window(sched, 0.1, 0.0));
  EXPECT_FALSE(check_global_invariant_window(sched, 0.1, 12.1));
  EXPECT_TRUE(check_global_invariant_window(sched, 0.1, 12.1000001));
}

TEST(Monitor, WindowAgreesWithMembershipOracle) {
  const std::vector<double> sched{12, 30, 55};
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 80.0);
  for (int i = 0; i < 10000; ++i) {
    const double t = u(rng);
    bool inside = false;
    for (double s : sched) inside = inside || (t >= s && t <= s + 0.1);
    ASSERT_EQ(check_global_invariant_window(sched, 0.1, t), !inside) << t;
  }
}

TEST(Monitor, GlobalInvariantGuardMatchesWindowFunction) {
  // The guard evaluated from the corpus text agrees with the closed form.
  const auto& p = test::corpus();
  ASSERT_EQ(p.globalInvariants.size(), 1u);
  const auto& gi = p.globalInvariants[0];
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 80.0);
  for (int i = 0; i < 2000; ++i) {
    const double t = i < 6 ? std::vector<double>{12, 12.1, 30, 30.1, 55, 55.1}[i] : u(rng);
    EXPECT_EQ(eval_guard(*gi.guard, p.constants, t), check_global_invariant_window({12, 30, 55}, 0.1, t)) << t;
  }
}

TEST(Monitor, NonInvasive) {
  const RunResult on = test::run_corpus(40.0, 42, true), off = test::run_corpus(40.0, 42, false);
  ASSERT_EQ(on.trace.records.size(), off.trace.records.size());
  for (std::size_t i = 1; i < on.trace.records.size(); ++i)
    EXPECT_EQ(serialize_record(on.trace.records[i]), serialize_record(off.trace.records[i]));
}

TEST(Monitor, TypeViolationReported) {
  Valuation v = state_at(1.0);
  v.set("Controller_Mch.drones2comd", Value::set({Value::integer(7)}));
  const auto vs = Monitor(test::corpus()).check_point(v, 1.0, CheckPhase::Injected);
  ASSERT_FALSE(vs.empty());
  EXPECT_EQ(vs[0].code, "type-violation");
  EXPECT_EQ(vs[0].phase, CheckPhase::Injected);
}

TEST(Monitor, LocalInvariantViolationReported) {
  Valuation v = state_at(1.0);
  v.set("EnvironmentScenario_Mch.schedule", Value::seq({Value::integer(30), Value::integer(12)}));
  const auto vs = Monitor(test::corpus()).check_point(v, 1.0, CheckPhase::Sample);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].code, "invariant-violation");
  EXPECT_EQ(vs[0].source, "EnvironmentScenario_Mch");
}

TEST(Monitor, FullRunHasNoViolations) {
  const RunResult r = test::run_corpus(79.9);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.status, RunStatus::Completed);
}

}  // namespace
}  // namespace heb
