#include <gtest/gtest.h>

#include <random>

#include "heb/eval.hpp"
#include "heb/parser.hpp"
#include "support.hpp"

namespace heb {
namespace {

Value ev(const std::string& text, const Valuation& v = {}) {
  ExprPtr e = parse_expression(text);
  EXPECT_TRUE(e) << text;
  return eval(e, v);
}

std::vector<Value> ints(std::initializer_list<int> xs) {
  std::vector<Value> out;
  for (int x : xs) out.push_back(Value::integer(x));
  return out;
}

TEST(Eval, HeadOfSchedule) { EXPECT_EQ(ev("head(⟨12, 30, 55⟩)"), Value::integer(12)); }

TEST(Eval, EmptyUnion) { EXPECT_EQ(ev("∅ ∪ ∅"), Value::set({})); }

TEST(Eval, Increasing) {
  EXPECT_TRUE(ev("increasing(⟨12, 30, 55⟩)").as_bool());
  EXPECT_FALSE(ev("increasing(⟨30, 12⟩)").as_bool());
}

// Pairwise oracle for increasing over random short sequences.
TEST(Eval, IncreasingMatchesPairwiseOracle) {
  std::mt19937 rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<Value> xs;
    bool inc = true;
    const int n = static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
      xs.push_back(Value::integer(static_cast<int>(rng() % 6)));
      if (k > 0 && !(xs[k - 1].as_real() < xs[k].as_real())) inc = false;
    }
    EXPECT_EQ(call_builtin("increasing", {Value::seq(xs)}).as_bool(), inc);
  }
}

TEST(Eval, LaunchGuard) {
  const auto& p = test::corpus();
  const auto* ctl = p.find_machine("Controller_Mch");
  const auto* launch = ctl->find_event("LaunchDrone1");
  ASSERT_TRUE(launch);
  Valuation v = p.constants;
  v.set("Controller_Mch.mode", Value::enum_lit("CTRLSTATE", "DISPATCH"));
  v.set("Controller_Mch.drones2comd", Value::set(ints({1, 2})));
  EXPECT_TRUE(eval_guard(*launch->guard_expr(), v, 0.05));
  EXPECT_FALSE(eval_guard(*launch->guard_expr(), v, 0.1));
}

TEST(Eval, ClosedGuardUnderEmptyValuation) { EXPECT_TRUE(eval_guard(*parse_expression("0 < 1"), {}, 0.0)); }

// ActivateController is enabled only for OFF and only strictly inside (0, δ).
TEST(Eval, ActivateControllerGuardTable) {
  const auto& p = test::corpus();
  const auto* act = p.find_machine("Controller_Mch")->find_event("ActivateController");
  ASSERT_TRUE(act);
  for (const char* lit : {"OFF", "DISPATCH", "RECALL", "UPDATEHAZ"}) {
    for (double t : {0.0, 0.001, 0.05, 0.0999, 0.1, 0.2}) {
      Valuation v = p.constants;
      v.set("Controller_Mch.mode", Value::enum_lit("CTRLSTATE", lit));
      const bool expected = std::string(lit) == "OFF" && t > 0.0 && t < 0.1;
      EXPECT_EQ(eval_guard(*act->guard_expr(), v, t), expected) << lit << " t=" << t;
    }
  }
}

TEST(Builtins, SequenceHelpers) {
  const Value s = Value::seq(ints({12, 30, 55}));
  EXPECT_FALSE(call_builtin("nonempty", {Value::seq({})}).as_bool());
  EXPECT_EQ(call_builtin("rest", {Value::seq(ints({1, 2}))}), Value::seq(ints({2})));
  EXPECT_EQ(call_builtin("tail", {s}), Value::seq(ints({30, 55})));
  EXPECT_EQ(call_builtin("head", {s}), call_builtin("first", {s}));
  EXPECT_EQ(call_builtin("tail", {s}), call_builtin("rest", {s}));
  EXPECT_EQ(call_builtin("last", {s}), Value::integer(55));
}

// tail shifts every index down by one.
TEST(Builtins, TailIndexShift) {
  std::mt19937 rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<Value> xs;
    for (int k = 1 + static_cast<int>(rng() % 6); k > 0; --k) xs.push_back(Value::integer(static_cast<int>(rng() % 50)));
    const Value t = call_builtin("tail", {Value::seq(xs)});
    ASSERT_EQ(t.items().size(), xs.size() - 1);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) EXPECT_EQ(t.items()[k], xs[k + 1]);
  }
}

TEST(Builtins, Errors) {
  try {
    call_builtin("head", {Value::seq({})});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code, "empty-sequence");
  }
  try {
    call_builtin("nosuchfn", {});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code, "unknown-builtin");
  }
  try {
    call_builtin("head", {});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code, "arity-mismatch");
  }
}

TEST(Eval, DivisionByZero) {
  EvalError err("", "");
  EXPECT_FALSE(try_eval(*parse_expression("1 / 0"), Valuation{}, {}, &err));
  EXPECT_EQ(err.code, "division-by-zero");
}

TEST(Eval, TypeMismatch) {
  EvalError err("", "");
  EXPECT_FALSE(try_eval(*parse_expression("1 + {2}"), Valuation{}, {}, &err));
  EXPECT_EQ(err.code, "type-mismatch");
}

TEST(Eval, MapletsNestLeft) {
  const Value v = ev("1 ↦ 2 ↦ 3");
  ASSERT_EQ(v.kind(), ValueKind::Tuple);
  EXPECT_EQ(v.items()[0], Value::pair(Value::integer(1), Value::integer(2)));
  EXPECT_EQ(v.flatten().size(), 3u);
}

TEST(Eval, Indexing) { EXPECT_EQ(ev("(1 ↦ 2 ↦ 3)[3]"), Value::integer(3)); }

TEST(Eval, SetsHaveNoDuplicates) { EXPECT_EQ(ev("card({1, 1, 2})"), Value::integer(2)); }

Value random_set(std::mt19937& rng) {
  std::vector<Value> xs;
  for (int k = static_cast<int>(rng() % 5); k > 0; --k) xs.push_back(Value::integer(static_cast<int>(rng() % 6)));
  return Value::set(xs);
}

TEST(Eval, SetAlgebraLaws) {
  std::mt19937 rng(9);
  auto union_ = parse_expression("A ∪ B"), swapped = parse_expression("B ∪ A"), self = parse_expression("A − A"),
       inter = parse_expression("A ∩ B");
  for (int i = 0; i < 300; ++i) {
    Valuation v;
    v.set("A", random_set(rng));
    v.set("B", random_set(rng));
    const Value u = eval(union_, v);
    EXPECT_EQ(u, eval(swapped, v));
    EXPECT_EQ(eval(self, v), Value::set({}));
    for (int x = 0; x < 6; ++x) {
      const Value xv = Value::integer(x);
      const bool inA = v.lookup("A")->contains(xv), inB = v.lookup("B")->contains(xv);
      EXPECT_EQ(u.contains(xv), inA || inB);
      EXPECT_EQ(eval(inter, v).contains(xv), inA && inB);
    }
  }
}

TEST(Eval, PureAcrossRepeats) {
  Valuation v;
  v.set("A", Value::set(ints({1, 2, 3})));
  ExprPtr e = parse_expression("card(A ∪ {4}) + 1");
  const Value first = eval(e, v);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(eval(e, v), first);
  EXPECT_EQ(*v.lookup("A"), Value::set(ints({1, 2, 3})));
}

TEST(Eval, IntervalMembership) {
  Valuation v;
  v.set("t", Value::real(12.05));
  EXPECT_TRUE(eval_bool(*parse_expression("t ∈ [12 … 12.1]"), v));
  v.set("t", Value::real(12.2));
  EXPECT_FALSE(eval_bool(*parse_expression("t ∈ [12 … 12.1]"), v));
}

TEST(Eval, TypeMembership) {
  Valuation v;
  EXPECT_TRUE(member_of(Value::real(2.5), *parse_expression("ℝ"), v));
  EXPECT_FALSE(member_of(Value::real(2.5), *parse_expression("ℤ"), v));
  EXPECT_TRUE(member_of(Value::set(ints({1})), *parse_expression("ℙ({1, 2})"), v));
}

}  // namespace
}  // namespace heb
