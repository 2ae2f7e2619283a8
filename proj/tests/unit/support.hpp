#pragma once

#include <filesystem>
#include <string>

#include "heb/elaborate.hpp"
#include "heb/parser.hpp"
#include "heb/scenario.hpp"
#include "heb/scheduler.hpp"

namespace heb::test {

inline std::string source_path(const std::string& rel) { return std::string(HEB_SOURCE_DIR) + "/" + rel; }
inline std::string corpus_dir() { return source_path("corpus/incident_response"); }
inline std::string nodes_dir() { return source_path("corpus/nodes"); }
inline std::string default_scenario() { return corpus_dir() + "/scenario.default.json"; }

inline ElaborationResult elaborate_paths(const std::vector<std::string>& paths, bool autoPliTrue = false) {
  ParseResult pr = parse_project_dir(paths);
  if (has_errors(pr.diagnostics)) {
    ElaborationResult bad;
    bad.diagnostics = pr.diagnostics;
    return bad;
  }
  return elaborate(pr.constructs, {autoPliTrue});
}

// Parsed and elaborated once per test binary; the corpus never changes.
inline const ElaboratedProject& corpus() {
  static const ElaborationResult er = elaborate_paths({corpus_dir()});
  return er.project;
}

inline ElaborationResult elaborate_text(const std::string& text, bool autoPliTrue = false) {
  SourceUnit u{"inline.heb", text, {}};
  ParseResult pr = parse_unit(u);
  if (has_errors(pr.diagnostics)) {
    ElaborationResult bad;
    bad.diagnostics = pr.diagnostics;
    return bad;
  }
  return elaborate(pr.constructs, {autoPliTrue});
}

inline RunResult run_corpus(double horizon, std::uint64_t seed = 42, bool monitor = true,
                            std::vector<Fault> faults = {}) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.horizon = horizon;
  cfg.monitor = monitor;
  cfg.faults = std::move(faults);
  return run_to_horizon(corpus(), cfg, load_scenario(default_scenario()));
}

inline std::vector<std::string> codes(const Diagnostics& ds) { return error_codes(ds); }

}  // namespace heb::test
