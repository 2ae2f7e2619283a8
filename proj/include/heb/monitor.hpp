#pragma once

#include <string>
#include <vector>

#include "heb/elaborate.hpp"
#include "heb/eval.hpp"

namespace heb {

enum class CheckPhase { Init, BeforeEvent, AfterEvent, Sample, EpisodeEnd, Injected };

const char* phase_name(CheckPhase p);

// Codes: invariant-violation, type-violation, global-invariant-violation,
// evaluation-error.
struct Violation {
  double t = 0.0;
  std::string code;
  std::string source;     // owning construct, or "Construct.var" for typing
  int index = 0;          // position of the predicate within its construct
  std::string predicate;  // pretty-printed
  CheckPhase phase = CheckPhase::Sample;
  std::string message;
  Valuation snapshot;  // variables only
};

// Evaluates every invariant of a project against a valuation.  Purely
// observational: nothing here feeds back into scheduling.
class Monitor {
 public:
  explicit Monitor(const ElaboratedProject& p, double eqTol = 1e-9);

  std::vector<Violation> check_point(const Valuation& v, double t, CheckPhase phase) const;

  // Only the global invariants; used by tests that sweep many instants.
  std::vector<Violation> check_global(const Valuation& v, double t) const;

  Valuation variables_only(const Valuation& v) const;

 private:
  struct Item {
    std::string code;
    std::string source;
    int index = 0;
    ExprPtr pred;     // predicate, or the type when `var` is set
    std::string var;  // typing check of this variable
  };
  std::vector<Violation> run(const std::vector<Item>& items, const Valuation& v, double t, CheckPhase phase) const;

  const ElaboratedProject& p_;
  EvalOptions opt_;
  std::vector<Item> items_;
  std::vector<Item> global_;
  std::vector<std::string> varNames_;
};

// True when `t` lies outside every closed window [s, s + width] opened by the
// schedule entries, i.e. where the hazard copies are required to agree.
bool check_global_invariant_window(const std::vector<double>& schedule, double width, double t);

}  // namespace heb
