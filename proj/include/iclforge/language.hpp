#pragma once

#include <string>
#include <string_view>

namespace iclforge {

enum class Language { kC, kPython, kJava, kCSharp };

std::string_view LanguageName(Language lang);
// Accepts "c", "python", "java", "csharp" (case-insensitive). Throws
// kInvalidArgument otherwise.
Language ParseLanguage(std::string_view name);

// True for languages the mutation engine can parse.
bool IsMutable(Language lang);

bool IsIdentifier(std::string_view token, Language lang);
// Lexical keywords only.
bool IsKeyword(std::string_view token, Language lang);
// Keywords plus literal words and a few predefined names that cannot be
// used as a local variable name without changing meaning (NULL, True, ...).
bool IsReservedWord(std::string_view token, Language lang);

// Whole-identifier occurrence test: `word` appears in `text` with no
// identifier character on either side.
bool ContainsWord(std::string_view text, std::string_view word);
std::size_t CountWord(std::string_view text, std::string_view word);

inline bool IsIdentStart(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool IsIdentChar(char c) {
  return IsIdentStart(c) || (c >= '0' && c <= '9');
}

}  // namespace iclforge
