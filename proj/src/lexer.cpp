#include "lexer.hpp"

#include <cstdint>
#include <set>
#include <string_view>
#include <utility>

namespace heb::detail {

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "MACHINE", "CONTEXT", "INTERFACE", "PROJECT", "GLOBINVS", "END", "SEES",
    "CONNECTS", "READS", "REFERS", "TIME", "CLOCK", "PLIANT", "VARIABLES",
    "INVARIANTS", "THEOREMS", "SETS", "CONSTANTS", "AXIOMS", "INITIALISATION",
    "EVENTS", "STATUS", "ANY", "WHERE", "WHEN", "INIT", "BEGIN", "THEN",
    "COMPLY", "SOLVE", "IS", "WITH", "SYNCH"};

const std::set<std::string, std::less<>> kConstructKeywords = {
    "MACHINE", "CONTEXT", "INTERFACE", "PROJECT", "GLOBINVS"};

// Operator words and ASCII spellings of mathematical symbols.
const std::vector<std::pair<std::string_view, std::string_view>> kWordOps = {
    {"in", "∈"}, {"notin", "∉"}, {"union", "∪"}, {"inter", "∩"}, {"and", "∧"},
    {"or", "∨"}, {"not", "¬"}, {"POW", "ℙ"}, {"UNION", "⋃"}, {"REAL", "ℝ"},
    {"NAT", "ℕ"},
};

// Longest spellings first so that maximal munch falls out of a linear scan.
const std::vector<std::pair<std::string_view, std::string_view>> kSymbols = {
    {"|->", "↦"}, {"<<", "⟨"}, {">>", "⟩"}, {"<=", "≤"}, {">=", "≥"},
    {"=>", "⇒"}, {"/=", "≠"}, {"!=", "≠"}, {"->", "→"}, {"..", "…"},
    {":=", ":="}, {":|", ":|"}, {"{}", "∅"},
    {"&", "∧"}, {"=", "="}, {"<", "<"}, {">", ">"}, {":", ":"}, {"+", "+"},
    {"-", "−"}, {"*", "×"}, {"/", "/"}, {"(", "("}, {")", ")"}, {"{", "{"},
    {"}", "}"}, {"[", "["}, {"]", "]"}, {",", ","}, {".", "•"}, {"|", "|"},
    {"?", "?"}, {"!", "!"},
    {"⇒", "⇒"}, {"∨", "∨"}, {"∧", "∧"}, {"¬", "¬"}, {"≠", "≠"}, {"≤", "≤"},
    {"≥", "≥"}, {"∈", "∈"}, {"∉", "∉"}, {"⊆", "⊆"}, {"↦", "↦"}, {"−", "−"},
    {"∪", "∪"}, {"∩", "∩"}, {"×", "×"}, {"⟨", "⟨"}, {"⟩", "⟩"}, {"…", "…"},
    {"•", "•"}, {"→", "→"}, {"ℙ", "ℙ"}, {"∅", "∅"}, {"𝒟", "𝒟"}, {"⋃", "⋃"},
    {"ℝ", "ℝ"}, {"ℕ", "ℕ"}, {"ℤ", "ℤ"}, {"⟶", "→"}, {"⦃", "{"}, {"⦄", "}"},
    {"⨯", "×"}, {"∖", "−"}, {"⋅", "×"},
};

const std::set<std::string, std::less<>> kContinueAfter = {
    "⇒", "∨", "∧", "¬", "=", "≠", "<", "≤", ">", "≥", "∈", "∉", ":", "⊆", "↦",
    "+", "−", "∪", "∩", "×", "/", ",", ":=", ":|", "…", "•", "|"};

const std::set<std::string, std::less<>> kContinueBefore = {
    "⇒", "∨", "∧", "=", "≠", "<", "≤", ">", "≥", "∈", "∉", "⊆", "↦",
    "+", "∪", "∩", "×", "/", ",", "…", "|", ":="};

// Decodes one UTF-8 code point; returns {codepoint, byte length}.
std::pair<char32_t, std::size_t> decode(const std::string& s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> char32_t {
    if (i + k >= s.size()) return 0xFFFD;
    return static_cast<unsigned char>(s[i + k]) & 0x3F;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) return {((b0 & 0x1F) << 6) | cont(1), 2};
  if ((b0 & 0xF0) == 0xE0) return {((b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2), 3};
  if ((b0 & 0xF8) == 0xF0)
    return {((b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
  return {0xFFFD, 1};
}

bool ident_start(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         (c >= 0x0370 && c <= 0x03FF);
}

bool ident_continue(char32_t c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool is_keyword(const std::string& word) { return kKeywords.count(word) > 0; }
bool is_construct_keyword(const std::string& word) { return kConstructKeywords.count(word) > 0; }

std::vector<Token> lex(const std::string& path, const std::string& content, Diagnostics& diags) {
  std::vector<Token> raw;
  int line = 1;
  std::size_t lineStart = 0;
  int depth = 0;
  std::size_t i = 0;
  const std::size_t n = content.size();

  auto loc_at = [&](std::size_t off) {
    // Columns count code points, starting at 1.
    int col = 1;
    for (std::size_t k = lineStart; k < off;) {
      k += decode(content, k).second;
      ++col;
    }
    return SourceLoc{path, line, col};
  };

  auto push = [&](TokKind kind, std::string text, std::size_t b, std::size_t e) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.loc = loc_at(b);
    t.begin = b;
    t.end = e;
    raw.push_back(std::move(t));
  };

  while (i < n) {
    const char c = content[i];
    if (c == '\n') {
      const bool suppress = depth > 0 || raw.empty() || raw.back().kind == TokKind::Newline ||
                            (raw.back().kind == TokKind::Sym && kContinueAfter.count(raw.back().text));
      if (!suppress) push(TokKind::Newline, "\n", i, i + 1);
      ++i;
      ++line;
      lineStart = i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && content[i + 1] == '/') {
      while (i < n && content[i] != '\n') ++i;
      continue;
    }
    if (is_digit(c)) {
      const std::size_t b = i;
      std::int64_t num = 0;
      std::int64_t den = 1;
      bool overflow = false;
      auto accumulate = [&](char d) {
        if (num > (INT64_MAX - 9) / 10) overflow = true;
        else num = num * 10 + (d - '0');
      };
      while (i < n && is_digit(content[i])) accumulate(content[i++]);
      if (i + 1 < n && content[i] == '.' && is_digit(content[i + 1])) {
        ++i;
        while (i < n && is_digit(content[i])) {
          accumulate(content[i++]);
          if (den > INT64_MAX / 10) overflow = true;
          else den *= 10;
        }
      }
      if (overflow) {
        diags.push_back(make_error("lexical-error", "numeric literal too long", loc_at(b)));
        continue;
      }
      push(TokKind::Number, content.substr(b, i - b), b, i);
      raw.back().number = Rational{num, den};
      continue;
    }
    auto [cp, len] = decode(content, i);
    if (ident_start(cp)) {
      const std::size_t b = i;
      while (i < n) {
        auto [c2, l2] = decode(content, i);
        if (!ident_continue(c2)) break;
        i += l2;
      }
      std::string word = content.substr(b, i - b);
      bool mapped = false;
      for (const auto& [spelling, canon] : kWordOps) {
        if (word == spelling) {
          push(TokKind::Sym, std::string(canon), b, i);
          mapped = true;
          break;
        }
      }
      if (mapped) continue;
      if (word == "INT") {
        push(TokKind::Sym, "ℤ", b, i);
      } else if (is_keyword(word)) {
        push(TokKind::Keyword, word, b, i);
      } else {
        push(TokKind::Ident, word, b, i);
      }
      continue;
    }
    bool matched = false;
    for (const auto& [spelling, canon] : kSymbols) {
      if (content.compare(i, spelling.size(), spelling) == 0) {
        push(TokKind::Sym, std::string(canon), i, i + spelling.size());
        i += spelling.size();
        const std::string& s = raw.back().text;
        if (s == "(" || s == "[" || s == "{" || s == "⟨") ++depth;
        else if ((s == ")" || s == "]" || s == "}" || s == "⟩") && depth > 0) --depth;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    diags.push_back(make_error("lexical-error",
                               "unexpected character '" + content.substr(i, len) + "'", loc_at(i)));
    i += len;
  }

  // Drop newlines that are followed by a token continuing the previous line.
  std::vector<Token> out;
  out.reserve(raw.size() + 1);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k].kind == TokKind::Newline && k + 1 < raw.size() &&
        raw[k + 1].kind == TokKind::Sym && kContinueBefore.count(raw[k + 1].text))
      continue;
    out.push_back(std::move(raw[k]));
  }
  Token eof;
  eof.kind = TokKind::Eof;
  eof.loc = SourceLoc{path, line, 1};
  eof.begin = eof.end = n;
  out.push_back(std::move(eof));
  return out;
}

}  // namespace heb::detail
