#include <algorithm>
#include <cmath>

#include "heb/eval.hpp"
#include "heb/geometry.hpp"

namespace heb {

namespace {

using Args = std::vector<Value>;

[[noreturn]] void type_error(const std::string& fn, const Value& v) {
  throw EvalError("type-mismatch", fn + " cannot take " + std::string(kind_name(v.kind())) + " " + to_string(v));
}

const std::vector<Value>& seq_arg(const std::string& fn, const Value& v) {
  if (v.kind() != ValueKind::Seq) type_error(fn, v);
  return v.items();
}

const std::vector<Value>& nonempty_seq(const std::string& fn, const Value& v) {
  const auto& xs = seq_arg(fn, v);
  if (xs.empty()) throw EvalError("empty-sequence", fn + " of the empty sequence");
  return xs;
}

double num(const std::string& fn, const Value& v) {
  if (!v.is_numeric()) type_error(fn, v);
  const double x = v.as_real();
  if (!std::isfinite(x)) throw EvalError("not-finite", fn + " received a non-finite number");
  return x;
}

Vec2 point2(const std::string& fn, const Value& v) {
  auto f = v.flatten();
  if (v.kind() != ValueKind::Tuple || f.size() != 2) type_error(fn, v);
  return {num(fn, f[0]), num(fn, f[1])};
}

std::vector<Hazard> hazards_of(const std::string& fn, const Value& v) {
  if (v.kind() != ValueKind::Set) type_error(fn, v);
  std::vector<Hazard> out;
  for (const auto& h : v.items()) {
    auto f = h.flatten();
    if (h.kind() != ValueKind::Tuple || f.size() != 5 || f[0].kind() != ValueKind::Enum) type_error(fn, h);
    Hazard z;
    z.shape = f[0].enum_literal() == "SQ" ? HazardShape::Square : HazardShape::Cylinder;
    z.cx = num(fn, f[1]);
    z.cy = num(fn, f[2]);
    z.size = num(fn, f[3]);
    z.height = num(fn, f[4]);
    out.push_back(z);
  }
  return out;
}

bool returning(const Value& goal) {
  return goal.kind() == ValueKind::Enum && goal.enum_literal() == "RETURN";
}

Value b_head(const Args& a) { return nonempty_seq("head", a[0]).front(); }

Value b_tail(const Args& a) {
  const auto& xs = nonempty_seq("tail", a[0]);
  return Value::seq({xs.begin() + 1, xs.end()});
}

Value b_last(const Args& a) { return nonempty_seq("last", a[0]).back(); }

Value b_nonempty(const Args& a) {
  if (a[0].kind() != ValueKind::Seq && a[0].kind() != ValueKind::Set) type_error("nonempty", a[0]);
  return Value::boolean(!a[0].items().empty());
}

Value b_increasing(const Args& a) {
  const auto& xs = seq_arg("increasing", a[0]);
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(compare(xs[k - 1], xs[k]) < 0)) return Value::boolean(false);
  return Value::boolean(true);
}

Value b_dom(const Args& a) {
  std::vector<Value> out;
  if (a[0].kind() == ValueKind::Seq) {
    for (std::size_t k = 1; k <= a[0].items().size(); ++k) out.push_back(Value::integer(static_cast<std::int64_t>(k)));
  } else if (a[0].kind() == ValueKind::Set) {
    for (const auto& p : a[0].items()) {
      if (p.kind() != ValueKind::Tuple || p.items().size() != 2) type_error("dom", p);
      out.push_back(p.items()[0]);
    }
  } else {
    type_error("dom", a[0]);
  }
  return Value::set(std::move(out));
}

Value b_card(const Args& a) {
  if (a[0].kind() != ValueKind::Seq && a[0].kind() != ValueKind::Set) type_error("card", a[0]);
  return Value::integer(static_cast<std::int64_t>(a[0].items().size()));
}

// partition(S, P1, ..., Pn): the parts are pairwise disjoint and cover S.
Value b_partition(const Args& a) {
  for (const auto& x : a)
    if (x.kind() != ValueKind::Set) type_error("partition", x);
  std::size_t total = 0;
  std::vector<Value> all;
  for (std::size_t k = 1; k < a.size(); ++k) {
    total += a[k].items().size();
    all.insert(all.end(), a[k].items().begin(), a[k].items().end());
  }
  Value merged = Value::set(std::move(all));
  return Value::boolean(merged.items().size() == total && merged == a[0]);
}

Value waypoints2(const std::vector<Vec2>& pts) {
  std::vector<Value> out;
  for (const auto& p : pts) out.push_back(Value::pair(Value::real(p.x), Value::real(p.y)));
  return Value::seq(std::move(out));
}

Value waypoints3(const std::vector<Vec3>& pts) {
  std::vector<Value> out;
  for (const auto& p : pts)
    out.push_back(Value::pair(Value::pair(Value::real(p.x), Value::real(p.y)), Value::real(p.z)));
  return Value::seq(std::move(out));
}

// calcTraj(goal, x, y, dest, hazards): ground route to `dest`, or home when
// the goal is RETURN.
Value b_calc_traj(const Args& a) {
  const std::string fn = "calcTraj";
  const Vec2 here{num(fn, a[1]), num(fn, a[2])};
  const Vec2 dest = returning(a[0]) ? Vec2{0.0, 0.0} : point2(fn, a[3]);
  return waypoints2(calc_traj(here, dest, hazards_of(fn, a[4]), GeometryConfig{}));
}

// calcCentAvoidTraj(goal, x, y, z, ox, oy, oz, responders, hazards, side).
// The controller sits at the origin, which is also home.
Value b_calc_cent_avoid_traj(const Args& a) {
  const std::string fn = "calcCentAvoidTraj";
  const Vec3 here{num(fn, a[1]), num(fn, a[2]), num(fn, a[3])};
  const Vec3 other{num(fn, a[4]), num(fn, a[5]), num(fn, a[6])};
  const auto hazards = hazards_of(fn, a[8]);
  const GeometryConfig g;
  if (returning(a[0])) return waypoints3(calc_return_traj(here, {0.0, 0.0}, hazards, g));
  std::vector<Vec2> responders;
  for (const auto& p : seq_arg(fn, a[7])) responders.push_back(point2(fn, p));
  const int side = num(fn, a[9]) < 0 ? -1 : 1;
  return waypoints3(calc_cent_avoid_traj(here, {0.0, 0.0}, responders, other, hazards, g, side));
}

const std::vector<BuiltinInfo>& registry() {
  static const std::vector<BuiltinInfo> table = {
      {"head", 1, 1, b_head},
      {"first", 1, 1, b_head},
      {"tail", 1, 1, b_tail},
      {"rest", 1, 1, b_tail},
      {"last", 1, 1, b_last},
      {"nonempty", 1, 1, b_nonempty},
      {"increasing", 1, 1, b_increasing},
      {"dom", 1, 1, b_dom},
      {"card", 1, 1, b_card},
      {"partition", 1, 64, b_partition},
      {"calcTraj", 5, 5, b_calc_traj},
      {"calcCentAvoidTraj", 10, 10, b_calc_cent_avoid_traj},
      {"seq", 1, 1, nullptr},
      {"POW", 1, 1, nullptr},
  };
  return table;
}

}  // namespace

const BuiltinInfo* find_builtin(const std::string& name) {
  for (const auto& b : registry())
    if (b.name == name) return &b;
  return nullptr;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& b : registry()) out.push_back(b.name);
  return out;
}

bool is_builtin_name(const std::string& name) { return find_builtin(name) != nullptr; }

Value call_builtin(const std::string& name, const std::vector<Value>& args) {
  const BuiltinInfo* b = find_builtin(name);
  if (!b || !b->fn) throw EvalError("unknown-builtin", "unknown built-in function " + name);
  const int n = static_cast<int>(args.size());
  if (n < b->minArity || n > b->maxArity)
    throw EvalError("arity-mismatch", name + " takes " + std::to_string(b->minArity) +
                                          (b->maxArity != b->minArity ? "+" : "") + " argument(s), got " +
                                          std::to_string(n));
  return b->fn(args);
}

}  // namespace heb
