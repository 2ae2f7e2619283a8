#include <gtest/gtest.h>

#include "heb/eval.hpp"
#include "heb/scenario.hpp"
#include "support.hpp"

namespace heb {
namespace {

ScenarioLiteral text(const std::string& t) {
  ScenarioLiteral l;
  l.kind = ScenarioLiteral::Kind::Text;
  l.text = t;
  return l;
}

TEST(Scenario, DefaultFileParses) {
  const auto s = load_scenario(test::default_scenario());
  ASSERT_EQ(s.entries.size(), 3u);
  const auto* second = s.find("EnvironmentScenario_Mch", "AddHazard", 2);
  ASSERT_NE(second, nullptr);
  EXPECT_EQ(second->bindings.at("tg").text, "SQ");
  EXPECT_DOUBLE_EQ(second->bindings.at("xx").number, -4.0);
  EXPECT_EQ(s.find("EnvironmentScenario_Mch", "AddHazard", 3), nullptr);
}

TEST(Scenario, QualifiedNameMatchesOnlyThatMachine) {
  const auto s = parse_scenario(R"([{"event":"Drone1_Mch.Hover","occurrence":1,"bindings":{"k":1}}])");
  EXPECT_NE(s.find("Drone1_Mch", "Hover", 1), nullptr);
  EXPECT_EQ(s.find("Drone2_Mch", "Hover", 1), nullptr);
}

TEST(Scenario, QualifiedEntryWinsOverPlain) {
  const auto s = parse_scenario(R"([{"event":"E","occurrence":1,"bindings":{"k":1}},
                                    {"event":"M.E","occurrence":1,"bindings":{"k":2}}])");
  const auto* e = s.find("M", "E", 1);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->event, "M.E");
}

TEST(Scenario, Malformed) {
  EXPECT_THROW(parse_scenario("{ nope"), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"({"event":"E"})"), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"([{"occurrence":1,"bindings":{}}])"), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"([{"event":"E","occurrence":0,"bindings":{}}])"), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"([{"event":"E","occurrence":1,"bindings":{"k":null}}])"), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"([{"event":"E","occurrence":1,"bindings":{}},
                                  {"event":"E","occurrence":1,"bindings":{}}])"),
               std::runtime_error);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), std::runtime_error);
}

TEST(Scenario, EmptyListIsValid) { EXPECT_TRUE(parse_scenario("[]").entries.empty()); }

TEST(Scenario, LiteralResolution) {
  const auto& p = test::corpus();
  EXPECT_EQ(resolve_literal(text("CYL"), p).enum_literal(), "CYL");
  EXPECT_EQ(resolve_literal(text("HAZTYPE.CYL"), p), resolve_literal(text("CYL"), p));
  EXPECT_THROW(resolve_literal(text("HEXAGON"), p), EvalError);
}

TEST(Scenario, NumbersKeepTheirKind) {
  const auto s = parse_scenario(R"([{"event":"E","occurrence":1,"bindings":{"i":3,"r":3.0,"b":true,"l":[1,2.5]}}])");
  const auto& b = s.entries[0].bindings;
  EXPECT_EQ(b.at("i").kind, ScenarioLiteral::Kind::Integer);
  EXPECT_EQ(b.at("r").kind, ScenarioLiteral::Kind::Number);
  EXPECT_EQ(b.at("b").kind, ScenarioLiteral::Kind::Bool);
  ASSERT_EQ(b.at("l").kind, ScenarioLiteral::Kind::List);
  EXPECT_EQ(b.at("l").items.size(), 2u);
}

}  // namespace
}  // namespace heb
