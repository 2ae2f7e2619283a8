#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heb/elaborate.hpp"
#include "heb/monitor.hpp"
#include "heb/ode.hpp"
#include "heb/scenario.hpp"
#include "heb/trace.hpp"

namespace heb {

enum class AsynchPolicy { EarliestPlusMargin, UniformInWindow };

const char* policy_name(AsynchPolicy p);
std::optional<AsynchPolicy> parse_policy(const std::string& s);

// Overwrites a variable at a given instant; used to check that the monitor
// notices desynchronised state.
struct Fault {
  double t = 0.0;
  std::string var;
  Value value;
};

struct RunConfig {
  std::uint64_t seed = 42;
  double horizon = 79.9;
  NumericConfig numeric;
  AsynchPolicy policy = AsynchPolicy::EarliestPlusMargin;
  std::optional<double> margin;  // default: δ/100 when the project defines δ, else 1e-3
  bool monitor = true;
  std::size_t zenoCap = 1000;    // micro-steps allowed at one instant
  std::vector<Fault> faults;
  bool keepSamples = true;
  std::map<std::string, std::string> headerInfo;  // extra header fields, e.g. corpus hash
};

struct EventOccurrence {
  double t = 0.0;
  int microStep = 0;
  std::string name;                   // event, or synch group
  std::vector<std::string> machines;  // every machine taking part
  std::vector<std::string> members;   // "Machine.Event"
  bool asynch = false;
  std::map<std::string, Value> bindings;
  std::vector<Delta> deltas;
};

enum class RunStatus { Completed, Aborted };

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::string abortCode;  // no-pliant-successor, no-successor, unbound-any, zeno, synch-write-conflict,
                          // evaluation-error, infeasible, scenario-error
  std::string abortMessage;
  double endTime = 0.0;
  Trace trace;
  std::vector<Violation> violations;
  std::vector<EventOccurrence> occurrences;
  Valuation finalState;
  std::map<std::string, std::string> activePliant;  // machine -> pliant event, empty when idle
  std::size_t plannerFallbacks = 0;

  // 0 clean, 3 invariant violations, 4 abort.
  int exit_code() const;
};

// Discrete-continuous scheduler for one run.  Sequential and deterministic
// given the configuration; independent instances share nothing.
class Simulator {
 public:
  Simulator(const ElaboratedProject& p, RunConfig cfg, ScenarioBindings scenario = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Initialises variables, settles the instant t = 0 and selects pliant
  // events.  Aborts with no-pliant-successor when a machine has none.
  void init_run();

  // Runs one pliant episode and the instant that ends it.  Returns false
  // once the horizon is reached or the run aborted.
  bool advance();

  bool finished() const;
  double now() const;
  const Valuation& state() const;
  RunResult result();

  // Fires a synch group at the current instant if its conjoined guard holds.
  std::optional<EventOccurrence> fire_synch(const std::string& group);

  // For each named machine: a pliant event must be enabled (unless an asynch
  // event involving the machine is armed) and no ordinary mode event may be.
  std::vector<Violation> check_handover(const std::vector<std::string>& machines) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run_to_horizon(const ElaboratedProject& p, const RunConfig& cfg, const ScenarioBindings& scenario = {});

}  // namespace heb
