#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heb/elaborate.hpp"
#include "heb/parser.hpp"

namespace heb {

// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitErrors = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitViolations = 3;
inline constexpr int kExitAbort = 4;
inline constexpr int kExitUsage = 64;

// Parsed and elaborated project together with the raw inputs it came from.
struct LoadedProject {
  std::vector<std::string> files;
  ParseResult parse;
  ElaborationResult elab;
  std::string contentHash;  // FNV-1a over file names and contents
  bool ioError = false;
};

LoadedProject load_project(const std::vector<std::string>& paths, const ElaborateOptions& opt = {});

// Entry point of the `hebc` tool.  `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heb
