#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "heb/ast.hpp"
#include "heb/diagnostics.hpp"

namespace heb::detail {

enum class TokKind { Ident, Number, Keyword, Sym, Newline, Eof };

struct Token {
  TokKind kind = TokKind::Eof;
  std::string text;  // canonical spelling for symbols and word operators
  Rational number{};
  SourceLoc loc;
  std::size_t begin = 0;  // byte offsets
  std::size_t end = 0;
};

// Tokenizes `content`.  Newlines inside brackets, after binary operators and
// commas, and before lines that open with a binary operator are dropped so
// the parser only sees statement-ending newlines.
std::vector<Token> lex(const std::string& path, const std::string& content, Diagnostics& diags);

bool is_keyword(const std::string& word);
bool is_construct_keyword(const std::string& word);

}  // namespace heb::detail
