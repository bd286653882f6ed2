#include "iclforge/mutation/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "iclforge/error.hpp"

namespace iclforge::mutation {

namespace {

constexpr std::array<std::string_view, 33> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "**=", "//=", "->", "++", "--",
    "<<",   ">>",  "<=",  ">=",  "==",  "!=",  "&&",  "||", "+=", "-=",
    "*=",   "/=",  "%=",  "&=",  "|=",  "^=",  "::",  "**", "//", ":=",
    "@=",   "<>",  "=>"};

constexpr std::string_view kSingleOps = "+-*/%=<>!&|^~?:;,.(){}[]@";

[[noreturn]] void Fail(std::string detail, std::size_t offset) {
  throw Error(ErrorCode::kParseError, std::move(detail), offset);
}

class Lexer {
 public:
  Lexer(std::string_view src, Language lang) : src_(src), lang_(lang) {}

  std::vector<Token> Run() {
    if (lang_ == Language::kPython) {
      RunPython();
    } else {
      RunBraced();
    }
    return std::move(out_);
  }

 private:
  char Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  bool AtEnd() const { return pos_ >= src_.size(); }

  void Advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  void Emit(TokenKind kind, std::size_t start) {
    out_.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)),
                         start, start_line_});
  }

  bool IsIdentCharHere(char c) const {
    return IsIdentChar(c) || (lang_ == Language::kJava && c == '$') ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  void LexIdentifier() {
    std::size_t start = pos_;
    while (!AtEnd() && IsIdentCharHere(Peek())) Advance();
    std::string_view word = src_.substr(start, pos_ - start);
    Emit(IsKeyword(word, lang_) ? TokenKind::kKeyword : TokenKind::kIdentifier,
         start);
  }

  void LexNumber() {
    std::size_t start = pos_;
    bool hex = Peek() == '0' && (Peek(1) == 'x' || Peek(1) == 'X');
    while (!AtEnd()) {
      char c = Peek();
      bool sign_next = Peek(1) == '+' || Peek(1) == '-';
      if (sign_next && (((c == 'e' || c == 'E') && !hex) ||
                        ((c == 'p' || c == 'P') && hex))) {
        Advance(2);
      } else if (IsIdentChar(c) || c == '.') {
        Advance();
      } else if (c == '\'' && lang_ == Language::kC &&
                 IsIdentChar(Peek(1)) && pos_ > start) {
        Advance();  // digit separator
      } else {
        break;
      }
    }
    Emit(TokenKind::kNumber, start);
  }

  void LexQuoted(char quote, std::size_t start) {
    Advance();  // opening quote
    while (true) {
      if (AtEnd()) Fail("unterminated literal", start);
      char c = Peek();
      if (c == '\\') {
        Advance(2);
        continue;
      }
      if (c == '\n') Fail("newline in literal", start);
      Advance();
      if (c == quote) break;
    }
  }

  void LexTripleQuoted(char quote, std::size_t start) {
    Advance(3);
    while (true) {
      if (AtEnd()) Fail("unterminated triple-quoted literal", start);
      if (Peek() == '\\') {
        Advance(2);
        continue;
      }
      if (Peek() == quote && Peek(1) == quote && Peek(2) == quote) {
        Advance(3);
        return;
      }
      Advance();
    }
  }

  bool LexOperator() {
    std::string_view rest = src_.substr(pos_);
    for (std::string_view op : kOperators) {
      if (rest.starts_with(op)) {
        std::size_t start = pos_;
        Advance(op.size());
        Emit(TokenKind::kOperator, start);
        return true;
      }
    }
    if (kSingleOps.find(Peek()) != std::string_view::npos) {
      std::size_t start = pos_;
      Advance();
      Emit(TokenKind::kOperator, start);
      return true;
    }
    return false;
  }

  void SkipBlockComment() {
    std::size_t start = pos_;
    Advance(2);
    while (!(Peek() == '*' && Peek(1) == '/')) {
      if (AtEnd()) Fail("unterminated comment", start);
      Advance();
    }
    Advance(2);
  }

  void RunBraced() {
    bool line_start = true;
    while (!AtEnd()) {
      char c = Peek();
      start_line_ = line_;
      if (c == '\n') {
        line_start = true;
        Advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
        continue;
      }
      if (c == '/' && Peek(1) == '/') {
        while (!AtEnd() && Peek() != '\n') Advance();
        continue;
      }
      if (c == '/' && Peek(1) == '*') {
        SkipBlockComment();
        continue;
      }
      if (c == '#' && lang_ == Language::kC && line_start) {
        std::size_t start = pos_;
        while (!AtEnd() && Peek() != '\n') {
          if (Peek() == '\\' && Peek(1) == '\n') Advance();
          if (Peek() == '/' && Peek(1) == '*') {
            SkipBlockComment();
            continue;
          }
          Advance();
        }
        Emit(TokenKind::kDirective, start);
        continue;
      }
      line_start = false;
      if (c == '\\' && Peek(1) == '\n') {
        Advance(2);
        continue;
      }
      if (IsIdentStart(c) || (lang_ == Language::kJava && c == '$') ||
          static_cast<unsigned char>(c) >= 0x80) {
        // C string prefixes: L"..", u8"..", u"..", U".."
        if (lang_ == Language::kC) {
          std::size_t plen = 0;
          if ((c == 'L' || c == 'U' || c == 'u') && (Peek(1) == '"' || Peek(1) == '\'')) plen = 1;
          if (c == 'u' && Peek(1) == '8' && Peek(2) == '"') plen = 2;
          if (plen > 0) {
            std::size_t start = pos_;
            Advance(plen);
            LexQuoted(Peek(), start);
            Emit(TokenKind::kString, start);
            continue;
          }
        }
        LexIdentifier();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(Peek(1))))) {
        LexNumber();
        continue;
      }
      if (c == '"' && lang_ == Language::kJava && Peek(1) == '"' && Peek(2) == '"') {
        std::size_t start = pos_;
        LexTripleQuoted('"', start);
        Emit(TokenKind::kString, start);
        continue;
      }
      if (c == '"' || c == '\'') {
        std::size_t start = pos_;
        LexQuoted(c, start);
        Emit(TokenKind::kString, start);
        continue;
      }
      if (LexOperator()) continue;
      Fail(std::string("unexpected character '") + c + "'", pos_);
    }
  }

  // Python: logical lines, INDENT/DEDENT from leading whitespace.
  void RunPython() {
    std::vector<std::size_t> indents{0};
    int depth = 0;
    bool at_line_start = true;
    while (true) {
      if (at_line_start && depth == 0) {
        // measure indentation; skip blank and comment-only lines
        std::size_t col = 0;
        std::size_t scan = pos_;
        while (scan < src_.size() && (src_[scan] == ' ' || src_[scan] == '\t' ||
                                      src_[scan] == '\f')) {
          col = src_[scan] == '\t' ? (col / 8 + 1) * 8 : col + 1;
          ++scan;
        }
        if (scan >= src_.size()) {
          Advance(scan - pos_);
          break;
        }
        char c = src_[scan];
        if (c == '\n' || c == '\r' || c == '#') {
          Advance(scan - pos_);
          while (!AtEnd() && Peek() != '\n') Advance();
          Advance();
          continue;
        }
        Advance(scan - pos_);
        start_line_ = line_;
        if (col > indents.back()) {
          indents.push_back(col);
          out_.push_back(Token{TokenKind::kIndent, "", pos_, line_});
        } else {
          while (col < indents.back()) {
            indents.pop_back();
            out_.push_back(Token{TokenKind::kDedent, "", pos_, line_});
          }
          if (col != indents.back()) Fail("inconsistent dedent", pos_);
        }
        at_line_start = false;
      }
      if (AtEnd()) break;
      char c = Peek();
      start_line_ = line_;
      if (c == '\n') {
        if (depth == 0) {
          out_.push_back(Token{TokenKind::kNewline, "", pos_, line_});
          at_line_start = true;
        }
        Advance();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        Advance();
        continue;
      }
      if (c == '#') {
        while (!AtEnd() && Peek() != '\n') Advance();
        continue;
      }
      if (c == '\\' && (Peek(1) == '\n' || (Peek(1) == '\r' && Peek(2) == '\n'))) {
        Advance(Peek(1) == '\r' ? 3 : 2);
        continue;
      }
      if (IsIdentStart(c) || static_cast<unsigned char>(c) >= 0x80) {
        // string prefix?
        std::size_t plen = 0;
        while (plen < 3 && IsIdentChar(Peek(plen))) ++plen;
        std::size_t prefix_len = 0;
        for (std::size_t len = 1; len <= 2 && len <= plen; ++len) {
          char q = Peek(len);
          if (q != '"' && q != '\'') continue;
          std::string prefix(src_.substr(pos_, len));
          std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                         [](unsigned char ch) { return std::tolower(ch); });
          static constexpr std::array<std::string_view, 10> kPrefixes = {
              "r", "b", "f", "u", "rb", "br", "fr", "rf", "bR", "Rb"};
          if (std::find(kPrefixes.begin(), kPrefixes.end(), prefix) != kPrefixes.end())
            prefix_len = len;
          break;
        }
        if (prefix_len > 0) {
          std::size_t start = pos_;
          Advance(prefix_len);
          LexPythonString(start);
          continue;
        }
        LexIdentifier();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(Peek(1))))) {
        LexNumber();
        continue;
      }
      if (c == '"' || c == '\'') {
        LexPythonString(pos_);
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') depth = std::max(0, depth - 1);
      if (LexOperator()) continue;
      Fail(std::string("unexpected character '") + c + "'", pos_);
    }
    if (!out_.empty() && out_.back().kind != TokenKind::kNewline &&
        out_.back().kind != TokenKind::kDedent) {
      out_.push_back(Token{TokenKind::kNewline, "", pos_, line_});
    }
    while (indents.size() > 1) {
      indents.pop_back();
      out_.push_back(Token{TokenKind::kDedent, "", pos_, line_});
    }
  }

  void LexPythonString(std::size_t start) {
    char q = Peek();
    if (Peek(1) == q && Peek(2) == q) {
      LexTripleQuoted(q, start);
    } else {
      LexQuoted(q, start);
    }
    Emit(TokenKind::kString, start);
  }

  std::string_view src_;
  Language lang_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t start_line_ = 1;
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> Tokenize(std::string_view code, Language lang) {
  if (!IsMutable(lang)) {
    throw Error(ErrorCode::kUnsupportedLanguage,
                "no grammar for " + std::string(LanguageName(lang)));
  }
  return Lexer(code, lang).Run();
}

}  // namespace iclforge::mutation
