#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "heb/ast.hpp"
#include "heb/diagnostics.hpp"

namespace heb {

struct ConstructSpan {
  std::size_t begin = 0;  // byte offsets into SourceUnit::content
  std::size_t end = 0;
  std::string name;
};

struct SourceUnit {
  std::string path;
  std::string content;
  std::vector<ConstructSpan> spans;  // filled by parse_unit
};

struct ParseResult {
  std::vector<ConstructAst> constructs;
  Diagnostics diagnostics;
};

ParseResult parse_unit(SourceUnit& src);

// Each path is either a `.heb` file or a directory scanned (non-recursively,
// sorted by name) for `.heb` files.  Construct names must be unique across
// all inputs.
ParseResult parse_project_dir(const std::vector<std::string>& paths);

// Parses a single expression or predicate; used by tests and the scenario
// loader.  Returns null and fills `diags` on failure.
ExprPtr parse_expression(const std::string& text, Diagnostics* diags = nullptr);

// Collects the `.heb` files named by `paths` (see parse_project_dir).
std::vector<std::string> collect_source_files(const std::vector<std::string>& paths,
                                              Diagnostics& diags);

}  // namespace heb
