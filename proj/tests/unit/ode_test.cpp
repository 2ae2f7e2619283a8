#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heb/ode.hpp"
#include "heb/parser.hpp"

namespace heb {
namespace {

// One coordinate of the Navigate flow: D x = v × (target − anchor).
OdeSystem navigate_x() {
  OdeSystem s;
  s.stateVars = {"drx"};
  s.rhs = {parse_expression("Vdr × (wx − thex)")};
  return s;
}

Valuation navigate_start(double vdr, double anchor, double target) {
  Valuation v;
  v.set("drx", Value::real(anchor));
  v.set("thex", Value::real(anchor));
  v.set("wx", Value::real(target));
  v.set("Vdr", Value::real(vdr));
  return v;
}

TEST(Ode, ConstantDerivativeCrossing) {
  const Valuation start = navigate_start(2.0, 0.0, 1.0);
  const auto r = integrate_episode(navigate_x(), start, 0.0, {{"hit", parse_expression("drx = 1")}}, 5.0, {});
  ASSERT_EQ(r.cause, Termination::GuardCrossing);
  EXPECT_NEAR(r.endTime, 0.5, 1e-9);
  EXPECT_EQ(r.crossed, std::vector<std::string>{"hit"});
  EXPECT_NEAR(r.endValuation.lookup("drx")->as_real(), 1.0, 1e-9);
}

TEST(Ode, ZeroRhsRunsToHorizon) {
  OdeSystem s;
  s.stateVars = {"x"};
  s.rhs = {parse_expression("0")};
  Valuation v;
  v.set("x", Value::real(3.0));
  const auto r = integrate_episode(s, v, 0.0, {}, 1.0, {});
  EXPECT_EQ(r.cause, Termination::HorizonReached);
  EXPECT_EQ(r.endTime, 1.0);
  EXPECT_EQ(r.endValuation.lookup("x")->as_real(), 3.0);
}

TEST(Ode, TimeEqualityIsExact) {
  OdeSystem s;
  s.stateVars = {};
  Valuation v;
  v.set("schedule", Value::seq({Value::integer(12), Value::integer(30)}));
  const auto r = integrate_episode(s, v, 11.0, {{"due", parse_expression("t = head(schedule)")}}, 20.0, {});
  ASSERT_EQ(r.cause, Termination::GuardCrossing);
  EXPECT_EQ(r.endTime, 12.0);
}

TEST(Ode, NextWindowPointAndOpenInterval) {
  Valuation v;
  auto w = next_true_window(*parse_expression("t = 12"), v, "t", 11.0, true);
  ASSERT_TRUE(w);
  EXPECT_TRUE(w->is_point());
  EXPECT_EQ(w->start, 12.0);
  v.set("δ", Value::real(0.1));
  w = next_true_window(*parse_expression("0 < t ∧ t < δ"), v, "t", 0.0, true);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->start, 0.0);
  EXPECT_FALSE(w->startClosed);
  EXPECT_EQ(w->end, 0.1);
  EXPECT_FALSE(w->endClosed);
}

TEST(Ode, SamplesStartAtEpisodeAndIncrease) {
  const auto r = integrate_episode(navigate_x(), navigate_start(0.5, 0.0, 1.0), 0.0, {}, 1.0, {});
  ASSERT_FALSE(r.samples.empty());
  EXPECT_EQ(r.samples.front().first, 0.0);
  for (std::size_t i = 1; i < r.samples.size(); ++i) EXPECT_GT(r.samples[i].first, r.samples[i - 1].first);
}

TEST(Ode, Deterministic) {
  const auto a = integrate_episode(navigate_x(), navigate_start(1.3, 0.2, 4.0), 0.0,
                                   {{"hit", parse_expression("drx = 4")}}, 5.0, {});
  const auto b = integrate_episode(navigate_x(), navigate_start(1.3, 0.2, 4.0), 0.0,
                                   {{"hit", parse_expression("drx = 4")}}, 5.0, {});
  EXPECT_EQ(a.endTime, b.endTime);
  EXPECT_EQ(a.endValuation.lookup("drx")->as_real(), b.endValuation.lookup("drx")->as_real());
  ASSERT_EQ(a.samples.size(), b.samples.size());
}

// Whatever the segment length, the anchored flow covers it in 1/Vdr.
TEST(Ode, SegmentTraversalTakesOneOverVelocity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-30.0, 30.0), vel(0.3, 2.5);
  for (int i = 0; i < 100; ++i) {
    const double a = pos(rng), b = pos(rng), v = vel(rng);
    if (std::fabs(b - a) < 1e-3) continue;
    Valuation start = navigate_start(v, a, b);
    const auto r = integrate_episode(navigate_x(), start, 0.0, {{"hit", parse_expression("drx = wx")}}, 10.0, {});
    ASSERT_EQ(r.cause, Termination::GuardCrossing);
    EXPECT_LE(std::fabs(r.endTime - 1.0 / v) * v, 1e-6) << "a=" << a << " b=" << b << " v=" << v;
  }
}

TEST(Ode, NoSampleShowsGuardBeforeCrossing) {
  const auto r = integrate_episode(navigate_x(), navigate_start(1.0, 0.0, 2.0), 0.0,
                                   {{"half", parse_expression("drx ≥ 1")}}, 5.0, {});
  ASSERT_EQ(r.cause, Termination::GuardCrossing);
  for (const auto& [t, v] : r.samples)
    if (t < r.endTime - 1e-9) EXPECT_LT(v.lookup("drx")->as_real(), 1.0);
}

TEST(Ode, NonFiniteStateIsInfeasible) {
  OdeSystem s;
  s.stateVars = {"x"};
  s.rhs = {parse_expression("x × x")};
  Valuation v;
  v.set("x", Value::real(1e200));
  const auto r = integrate_episode(s, v, 0.0, {}, 1.0, {});
  EXPECT_EQ(r.cause, Termination::Infeasible);
}

TEST(LocateCrossing, LinearRoot) {
  const double t = locate_crossing([](double x) { return 2 * x - 1 >= 0; }, 0.4, 0.6, 1e-9);
  EXPECT_NEAR(t, 0.5, 1e-9);
}

TEST(LocateCrossing, RejectsTrueAtStart) {
  EXPECT_THROW(locate_crossing([](double) { return true; }, 0.0, 1.0, 1e-9), std::logic_error);
}

TEST(LocateCrossing, RandomLinearResiduals) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> slope(0.1, 10.0), root(-50.0, 50.0), pad(1e-3, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double k = slope(rng), r = root(rng);
    const double lo = r - pad(rng), hi = r + pad(rng);
    const double t = locate_crossing([&](double x) { return k * (x - r) >= 0; }, lo, hi, 1e-9);
    EXPECT_LE(std::fabs(t - r), 1e-9) << k << " " << r;
  }
}

}  // namespace
}  // namespace heb
