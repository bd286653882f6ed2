#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/language.hpp"

namespace iclforge::mutation {

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kNumber,
  kString,
  kOperator,
  kDirective,  // C preprocessor line, continuation lines included
  kNewline,    // Python logical line end
  kIndent,     // Python
  kDedent,     // Python
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset = 0;  // byte offset into the source
  std::size_t line = 1;

  bool Is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool IsOp(std::string_view t) const { return Is(TokenKind::kOperator, t); }
  bool IsKw(std::string_view t) const { return Is(TokenKind::kKeyword, t); }
};

// Comments are dropped. Throws Error(kParseError, position = byte offset) on
// unterminated literals/comments, stray characters, or (Python) inconsistent
// dedents. Python output ends with NEWLINE and the closing DEDENTs.
std::vector<Token> Tokenize(std::string_view code, Language lang);

}  // namespace iclforge::mutation
