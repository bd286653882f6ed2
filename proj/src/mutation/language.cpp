#include "iclforge/language.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>

#include "iclforge/error.hpp"

namespace iclforge {

namespace {

const std::unordered_set<std::string_view>& CReserved() {
  static const std::unordered_set<std::string_view> words = {
      "auto", "break", "case", "char", "const", "continue", "default", "do",
      "double", "else", "enum", "extern", "float", "for", "goto", "if",
      "inline", "int", "long", "register", "restrict", "return", "short",
      "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
      "unsigned", "void", "volatile", "while", "_Bool", "_Complex",
      "_Imaginary", "_Alignas", "_Alignof", "_Atomic", "_Generic",
      "_Noreturn", "_Static_assert", "_Thread_local"};
  return words;
}

const std::unordered_set<std::string_view>& CExtras() {
  static const std::unordered_set<std::string_view> words = {
      "NULL", "EOF", "true", "false", "bool", "main", "stdin", "stdout",
      "stderr", "errno", "size_t"};
  return words;
}

const std::unordered_set<std::string_view>& JavaReserved() {
  static const std::unordered_set<std::string_view> words = {
      "abstract", "assert", "boolean", "break", "byte", "case", "catch",
      "char", "class", "const", "continue", "default", "do", "double", "else",
      "enum", "extends", "final", "finally", "float", "for", "goto", "if",
      "implements", "import", "instanceof", "int", "interface", "long",
      "native", "new", "package", "private", "protected", "public", "return",
      "short", "static", "strictfp", "super", "switch", "synchronized", "this",
      "throw", "throws", "transient", "try", "void", "volatile", "while",
      "true", "false", "null", "_"};
  return words;
}

const std::unordered_set<std::string_view>& JavaExtras() {
  static const std::unordered_set<std::string_view> words = {
      "var", "yield", "record", "sealed", "permits", "String", "Object",
      "System", "Integer", "Math"};
  return words;
}

const std::unordered_set<std::string_view>& PythonReserved() {
  static const std::unordered_set<std::string_view> words = {
      "False", "None", "True", "and", "as", "assert", "async", "await",
      "break", "class", "continue", "def", "del", "elif", "else", "except",
      "finally", "for", "from", "global", "if", "import", "in", "is",
      "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
      "while", "with", "yield"};
  return words;
}

const std::unordered_set<std::string_view>& PythonExtras() {
  static const std::unordered_set<std::string_view> words = {
      "match", "case", "self", "cls", "print", "len", "range", "list",
      "dict", "set", "str", "int", "float", "__name__", "__file__"};
  return words;
}

const std::unordered_set<std::string_view>& CSharpReserved() {
  static const std::unordered_set<std::string_view> words = {
      "abstract", "as", "base", "bool", "break", "byte", "case", "catch",
      "char", "checked", "class", "const", "continue", "decimal", "default",
      "delegate", "do", "double", "else", "enum", "event", "explicit",
      "extern", "false", "finally", "fixed", "float", "for", "foreach",
      "goto", "if", "implicit", "in", "int", "interface", "internal", "is",
      "lock", "long", "namespace", "new", "null", "object", "operator", "out",
      "override", "params", "private", "protected", "public", "readonly",
      "ref", "return", "sbyte", "sealed", "short", "sizeof", "stackalloc",
      "static", "string", "struct", "switch", "this", "throw", "true", "try",
      "typeof", "uint", "ulong", "unchecked", "unsafe", "ushort", "using",
      "virtual", "void", "volatile", "while", "var"};
  return words;
}

}  // namespace

std::string_view LanguageName(Language lang) {
  switch (lang) {
    case Language::kC: return "c";
    case Language::kPython: return "python";
    case Language::kJava: return "java";
    case Language::kCSharp: return "csharp";
  }
  return "c";
}

Language ParseLanguage(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "c") return Language::kC;
  if (lower == "python" || lower == "py") return Language::kPython;
  if (lower == "java") return Language::kJava;
  if (lower == "csharp" || lower == "c#" || lower == "cs")
    return Language::kCSharp;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown language '" + std::string(name) + "'");
}

bool IsMutable(Language lang) { return lang != Language::kCSharp; }

bool IsIdentifier(std::string_view token, Language lang) {
  if (token.empty() || !IsIdentStart(token.front())) {
    return lang == Language::kJava && !token.empty() && token.front() == '$' &&
           std::all_of(token.begin() + 1, token.end(),
                       [](char c) { return IsIdentChar(c) || c == '$'; });
  }
  return std::all_of(token.begin(), token.end(), [lang](char c) {
    return IsIdentChar(c) || (lang == Language::kJava && c == '$');
  });
}

bool IsKeyword(std::string_view token, Language lang) {
  switch (lang) {
    case Language::kC: return CReserved().contains(token);
    case Language::kJava: return JavaReserved().contains(token);
    case Language::kPython: return PythonReserved().contains(token);
    case Language::kCSharp: return CSharpReserved().contains(token);
  }
  return false;
}

bool IsReservedWord(std::string_view token, Language lang) {
  if (IsKeyword(token, lang)) return true;
  switch (lang) {
    case Language::kC: return CExtras().contains(token);
    case Language::kJava: return JavaExtras().contains(token);
    case Language::kPython: return PythonExtras().contains(token);
    case Language::kCSharp: return false;
  }
  return false;
}

std::size_t CountWord(std::string_view text, std::string_view word) {
  if (word.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = text.find(word);
  while (pos != std::string_view::npos) {
    bool left_ok = pos == 0 || !(IsIdentChar(text[pos - 1]) || text[pos - 1] == '$');
    std::size_t end = pos + word.size();
    bool right_ok =
        end >= text.size() || !(IsIdentChar(text[end]) || text[end] == '$');
    if (left_ok && right_ok) ++count;
    pos = text.find(word, pos + 1);
  }
  return count;
}

bool ContainsWord(std::string_view text, std::string_view word) {
  return CountWord(text, word) > 0;
}

}  // namespace iclforge
