#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heb/ast.hpp"
#include "heb/eval.hpp"

namespace heb {

struct NumericConfig {
  double dtMax = 1e-3;       // integration step
  double epsT = 1e-9;        // crossing-time resolution
  double epsGuard = 1e-9;    // residual tolerance for equality guards
  double sampleStep = 0.05;  // output sampling grid
};

struct OdeSystem {
  std::vector<std::string> stateVars;             // integrated
  std::vector<ExprPtr> rhs;                       // one per state var
  std::vector<std::pair<std::string, ExprPtr>> directAssigns;  // algebraic `y := E`
  std::string timeVar = "t";
};

// A guard the integrator must stop at when it turns true.
struct WatchGuard {
  std::string id;
  ExprPtr guard;
};

// Left and right sides of an equality atom at the moment it was crossed.
struct CrossedAtom {
  double lhs = 0.0;
  double rhs = 0.0;
};

enum class Termination { GuardCrossing, HorizonReached, Infeasible };

struct EpisodeResult {
  double endTime = 0.0;
  Valuation endValuation;  // left limit at endTime
  std::vector<std::pair<double, Valuation>> samples;
  Termination cause = Termination::HorizonReached;
  std::vector<std::string> crossed;                  // watch ids true at endTime
  std::map<const Expr*, CrossedAtom> crossedAtoms;   // equality atoms that changed sign
  std::string error;                                 // set when Infeasible
};

// Integrates from `start` (which already holds every variable and constant)
// over (t0, tMax].  Samples are taken at t0 and at every multiple of
// cfg.sampleStep strictly inside the episode.  Watch guards that mention no
// state variable are treated as time-only and resolved exactly.
EpisodeResult integrate_episode(const OdeSystem& sys, const Valuation& start, double t0,
                                const std::vector<WatchGuard>& watch, double tMax, const NumericConfig& cfg,
                                bool keepSamples = true);

// Bisection for the first time in (lo, hi] where `g` holds, given it fails
// at lo and holds at hi.  Throws std::logic_error otherwise.
double locate_crossing(const std::function<bool(double)>& g, double lo, double hi, double epsT);

// Maximal interval over which a time-dependent guard holds.
struct TimeWindow {
  double start = 0.0;
  bool startClosed = true;
  double end = std::numeric_limits<double>::infinity();
  bool endClosed = false;
  bool is_point() const { return startClosed && endClosed && start == end; }
};

// Instants at which atoms of `g` mentioning `timeVar` can change truth value,
// with the rest of the state held fixed.  Roots are isolated symbolically
// where the atom is a sum/difference chain around the time variable, so a
// guard `t = head(schedule)` yields exactly head(schedule).
std::vector<double> time_breakpoints(const Expr& g, const Scope& state, const std::string& timeVar);

// First window at or after `from` in which `g` holds, state held fixed.  When
// `includeFrom` is false the instant `from` itself is skipped.
std::optional<TimeWindow> next_true_window(const Expr& g, const Scope& state, const std::string& timeVar,
                                           double from, bool includeFrom, const EvalOptions& opt = {});

bool mentions_any(const ExprPtr& e, const std::vector<std::string>& names);

}  // namespace heb
