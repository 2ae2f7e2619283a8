#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heb/trace.hpp"
#include "support.hpp"

namespace heb {
namespace {

TraceRecord header() {
  TraceRecord h;
  h.kind = RecordKind::Header;
  h.event = "P";
  h.machines = {};
  return h;
}

TEST(Trace, AppendKeepsOrder) {
  Trace tr;
  append(tr, header());
  TraceRecord s;
  s.kind = RecordKind::Sample;
  s.t = 0.05;
  append(tr, s);
  TraceRecord add;
  add.t = 12.0;
  add.event = "AddHazard";
  add.machines = {"EnvironmentScenario_Mch"};
  add.deltas.push_back({"hazards", Value::set({}), Value::set({Value::integer(1)})});
  append(tr, add);
  EXPECT_EQ(tr.records.size(), 3u);
  TraceRecord late;
  late.t = 11.9;
  EXPECT_THROW(append(tr, late), std::invalid_argument);
}

TEST(Trace, SameInstantNeedsHigherMicroStep) {
  Trace tr;
  TraceRecord a;
  a.t = 1.0;
  a.microStep = 2;
  append(tr, a);
  TraceRecord b = a;
  b.microStep = 1;
  EXPECT_THROW(append(tr, b), std::invalid_argument);
}

TEST(Trace, EmptyTraceIsHeaderOnly) {
  Trace tr;
  append(tr, header());
  const std::string text = serialize_jsonl(tr);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.rfind("{\"t\":", 0), 0u);
}

TEST(Trace, KeyOrderIsFixed) {
  TraceRecord r;
  r.t = 1.5;
  r.event = "E";
  r.machines = {"M"};
  const std::string line = serialize_record(r);
  const std::vector<std::string> keys{"\"t\"", "\"kind\"", "\"machine\"", "\"event\"", "\"deltas\"", "\"microStep\""};
  std::size_t at = 0;
  for (const auto& k : keys) {
    const auto pos = line.find(k, at);
    ASSERT_NE(pos, std::string::npos) << k << " in " << line;
    at = pos;
  }
}

TEST(Trace, RealsRoundTripThroughText) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(std::stod(format_real(x)), x);
  }
  EXPECT_NE(format_real(3.0).find_first_of(".e"), std::string::npos);
}

TEST(Trace, ValueJsonRoundTrip) {
  const Value v = Value::tuple({Value::enum_lit("HAZTYPE", "SQ"), Value::real(-4.0), Value::integer(3),
                                Value::set({Value::boolean(true)}), Value::seq({Value::real(0.1)})});
  EXPECT_EQ(value_from_json(value_to_json(v)), v);
}

TEST(Trace, CorpusTraceRoundTrips) {
  const RunResult r = test::run_corpus(15.0);
  const std::string text = serialize_jsonl(r.trace);
  const Trace back = deserialize_jsonl(text);
  EXPECT_EQ(serialize_jsonl(back), text);
  EXPECT_TRUE(validate_trace(text).empty());
}

TEST(Trace, AddHazardDeltaCarriesScenarioTuple) {
  const RunResult r = test::run_corpus(12.5);
  const std::string text = serialize_jsonl(r.trace);
  const auto pos = text.find("\"event\":\"AddHazard\"");
  ASSERT_NE(pos, std::string::npos);
  const std::string line = text.substr(text.rfind('\n', pos) + 1, text.find('\n', pos) - text.rfind('\n', pos) - 1);
  EXPECT_NE(line.find("\"HAZTYPE.CYL\",5.0]},8.0]},1.5]},3.0]"), std::string::npos) << line;
}

TEST(Trace, FirstModeEventIsControllerActivation) {
  const RunResult r = test::run_corpus(1.0);
  for (const auto& rec : r.trace.records)
    if (rec.kind == RecordKind::ModeEvent) {
      EXPECT_EQ(rec.event, "ActivateController");
      break;
    }
}

TEST(Trace, ValidateFlagsProblems) {
  EXPECT_FALSE(validate_trace("not json\n").empty());
  EXPECT_FALSE(validate_trace("{\"t\":1.0,\"kind\":\"sample\",\"machine\":[],\"event\":\"\",\"deltas\":[],\"microStep\":0}\n"
                              "{\"t\":0.5,\"kind\":\"sample\",\"machine\":[],\"event\":\"\",\"deltas\":[],\"microStep\":0}\n")
                   .empty());
}

TEST(Trace, CsvHasSampleRowsOnly) {
  const RunResult r = test::run_corpus(3.0);
  const std::string csv = serialize_csv(r.trace);
  std::size_t samples = 0;
  for (const auto& rec : r.trace.records) samples += rec.kind == RecordKind::Sample;
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), samples + 1);
  EXPECT_EQ(csv.rfind("t,", 0), 0u);
}

TEST(Trace, HashIsStable) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

}  // namespace
}  // namespace heb
