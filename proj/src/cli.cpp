#include "heb/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "heb/fixtures.hpp"
#include "heb/scheduler.hpp"
#include "heb/trace.hpp"

namespace heb {

namespace {

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  ok = static_cast<bool>(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

void print_diagnostics(const Diagnostics& ds, std::ostream& err) {
  for (const auto& d : ds) err << format_diagnostic(d) << '\n';
}

bool has_io_error(const Diagnostics& ds) {
  for (const auto& d : ds)
    if (d.code == "io-error") return true;
  return false;
}

std::string violation_line(const Violation& v) {
  TraceRecord r;
  r.t = v.t;
  r.kind = RecordKind::Violation;
  r.event = v.source;
  std::map<std::string, Value> sorted(v.snapshot.values.begin(), v.snapshot.values.end());
  for (const auto& [k, x] : sorted) r.deltas.push_back({k, std::nullopt, x});
  r.info["code"] = v.code;
  r.info["index"] = std::to_string(v.index);
  r.info["phase"] = phase_name(v.phase);
  r.info["predicate"] = v.predicate;
  r.info["message"] = v.message;
  return serialize_record(r);
}

}  // namespace

LoadedProject load_project(const std::vector<std::string>& paths, const ElaborateOptions& opt) {
  LoadedProject lp;
  Diagnostics collectDiags;
  lp.files = collect_source_files(paths, collectDiags);
  std::uint64_t h = fnv1a64("");
  for (const auto& f : lp.files) {
    bool ok = false;
    const std::string text = read_file(f, ok);
    h = fnv1a64(std::filesystem::path(f).filename().string(), h);
    h = fnv1a64(text, h);
  }
  lp.contentHash = hex64(h);
  lp.parse = parse_project_dir(paths);
  lp.ioError = has_io_error(lp.parse.diagnostics);
  if (!has_errors(lp.parse.diagnostics)) lp.elab = elaborate(lp.parse.constructs, opt);
  return lp;
}

int run_cli(const std::vector<std::string>& rawArgs, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parse, check and simulate multi-machine hybrid models", "hebc"};
  app.require_subcommand(1);

  std::vector<std::string> project;
  auto* parse = app.add_subcommand("parse", "Parse sources and report syntax diagnostics");
  parse->add_option("--project", project, "Directory or .heb file (repeatable)")->required();

  bool autoPliTrue = false;
  auto* check = app.add_subcommand("check", "Parse, elaborate and run static checks");
  check->add_option("--project", project, "Directory or .heb file (repeatable)")->required();
  check->add_flag("--auto-plitrue", autoPliTrue, "Give machines without pliant events an always-enabled one");

  std::string scenarioPath, outPrefix = "run", format = "jsonlines", policyText = "earliest-plus-margin";
  std::uint64_t seed = 42;
  double horizon = 79.9;
  std::optional<double> margin;
  bool checkInvariants = false;
  NumericConfig numeric;
  auto* run = app.add_subcommand("run", "Simulate a project and write its trace");
  run->add_option("--project", project, "Directory or .heb file (repeatable)")->required();
  run->add_option("--scenario", scenarioPath, "Scenario bindings (JSON)");
  run->add_option("--seed", seed, "Random seed")->capture_default_str();
  run->add_option("--horizon", horizon, "End time of the run")->capture_default_str();
  run->add_option("--out", outPrefix, "Output prefix")->capture_default_str();
  run->add_option("--format", format, "Trace format")->check(CLI::IsMember({"jsonlines", "csv"}))->capture_default_str();
  run->add_flag("--check-invariants", checkInvariants, "Monitor invariants during the run");
  run->add_flag("--auto-plitrue", autoPliTrue, "Give machines without pliant events an always-enabled one");
  run->add_option("--asynch-policy", policyText, "earliest-plus-margin or uniform-random-in-window")
      ->check(CLI::IsMember({"earliest-plus-margin", "uniform-random-in-window"}))
      ->capture_default_str();
  run->add_option("--margin", margin, "Asynch firing margin (default: δ/100)");
  run->add_option("--dt-max", numeric.dtMax, "Integration step")->capture_default_str();
  run->add_option("--sample-step", numeric.sampleStep, "Sampling grid")->capture_default_str();

  std::string tracePath;
  auto* validate = app.add_subcommand("trace-validate", "Check the structure of a .trace.jsonl file");
  validate->add_option("trace", tracePath, "Trace file")->required();

  std::string fixturesDir;
  auto* fixtures = app.add_subcommand("fixtures", "Run the golden fixture suite");
  fixtures->add_option("--dir", fixturesDir, "Fixture root directory")->required();

  std::vector<std::string> args(rawArgs.rbegin(), rawArgs.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (parse->parsed()) {
    ParseResult r = parse_project_dir(project);
    print_diagnostics(r.diagnostics, err);
    if (has_io_error(r.diagnostics)) return kExitIo;
    if (has_errors(r.diagnostics)) return kExitErrors;
    out << r.constructs.size() << " constructs parsed\n";
    return kExitOk;
  }

  if (check->parsed()) {
    LoadedProject lp = load_project(project, {autoPliTrue});
    print_diagnostics(lp.parse.diagnostics, err);
    if (lp.ioError) return kExitIo;
    if (has_errors(lp.parse.diagnostics)) return kExitErrors;
    print_diagnostics(lp.elab.diagnostics, err);
    if (!lp.elab.ok()) return kExitErrors;
    print_diagnostics(feasibility_scan(lp.elab.project), err);
    const auto& p = lp.elab.project;
    out << p.machines.size() << " machines, " << p.interfaces.size() << " interfaces, " << p.contexts.size()
        << " contexts, " << p.synchGroups.size() << " synch groups\n";
    return kExitOk;
  }

  if (run->parsed()) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      err << "usage error: --horizon must be a positive number\n";
      return kExitUsage;
    }
    ScenarioBindings scenario;
    std::string scenarioHash = "none";
    if (!scenarioPath.empty()) {
      try {
        scenario = load_scenario(scenarioPath);
        bool ok = false;
        scenarioHash = hex64(fnv1a64(read_file(scenarioPath, ok)));
      } catch (const std::exception& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
      }
    }
    LoadedProject lp = load_project(project, {autoPliTrue});
    print_diagnostics(lp.parse.diagnostics, err);
    if (lp.ioError) return kExitIo;
    if (has_errors(lp.parse.diagnostics)) return kExitErrors;
    print_diagnostics(lp.elab.diagnostics, err);
    if (!lp.elab.ok()) return kExitErrors;

    RunConfig cfg;
    cfg.seed = seed;
    cfg.horizon = horizon;
    cfg.numeric = numeric;
    cfg.policy = *parse_policy(policyText);
    cfg.margin = margin;
    cfg.monitor = checkInvariants;
    cfg.keepSamples = true;
    cfg.headerInfo["corpusHash"] = lp.contentHash;
    cfg.headerInfo["scenarioHash"] = scenarioHash;
    RunResult res = run_to_horizon(lp.elab.project, cfg, scenario);

    const std::string traceFile = outPrefix + (format == "csv" ? ".trace.csv" : ".trace.jsonl");
    const std::string traceText = format == "csv" ? serialize_csv(res.trace) : serialize_jsonl(res.trace);
    std::string violText;
    for (const auto& v : res.violations) violText += violation_line(v) + "\n";
    if (!write_file(traceFile, traceText) || !write_file(outPrefix + ".violations.jsonl", violText)) {
      err << "io-error: cannot write outputs with prefix " << outPrefix << '\n';
      return kExitIo;
    }
    out << "run " << (res.status == RunStatus::Completed ? "completed" : "aborted") << " at t=" << format_real(res.endTime)
        << ": " << res.occurrences.size() << " mode events, " << res.violations.size() << " violations\n";
    if (res.status == RunStatus::Aborted) err << "abort: " << res.abortCode << ": " << res.abortMessage << '\n';
    if (res.plannerFallbacks) err << "warning: planner fell back to direct segments " << res.plannerFallbacks << " times\n";
    return res.exit_code();
  }

  if (validate->parsed()) {
    bool ok = false;
    const std::string text = read_file(tracePath, ok);
    if (!ok) {
      err << "io-error: cannot read " << tracePath << '\n';
      return kExitIo;
    }
    const auto problems = validate_trace(text);
    for (const auto& p : problems) err << tracePath << ": " << p << '\n';
    if (!problems.empty()) return kExitErrors;
    out << tracePath << ": valid\n";
    return kExitOk;
  }

  if (fixtures->parsed()) {
    const auto results = run_fixtures(fixturesDir);
    for (const auto& r : results) {
      const char* tag = r.passed ? (r.expectedFailure ? "XPASS" : "PASS") : (r.expectedFailure ? "XFAIL" : "FAIL");
      out << tag << " " << r.name << '\n';
      if (!r.passed || r.expectedFailure)
        for (const auto& d : r.diff) out << "    " << d << '\n';
    }
    const bool ok = suite_ok(results);
    out << results.size() << " fixtures, " << (ok ? "suite ok" : "suite FAILED") << '\n';
    return ok ? kExitOk : kExitErrors;
  }
  return kExitUsage;
}

}  // namespace heb
