#include "iclforge/mutation/analysis.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "iclforge/error.hpp"
#include "iclforge/mutation/lexer.hpp"

namespace iclforge::mutation {

namespace {

using Tokens = std::vector<Token>;

[[noreturn]] void Fail(std::string detail, std::size_t offset) {
  throw Error(ErrorCode::kParseError, std::move(detail), offset);
}

bool IsOpen(const Token& t) {
  return t.kind == TokenKind::kOperator &&
         (t.text == "(" || t.text == "[" || t.text == "{");
}
bool IsClose(const Token& t) {
  return t.kind == TokenKind::kOperator &&
         (t.text == ")" || t.text == "]" || t.text == "}");
}
char Closer(std::string_view open) {
  return open == "(" ? ')' : open == "[" ? ']' : '}';
}

// match[i] = index of the partner bracket, or npos for non-brackets.
std::vector<std::size_t> MatchBrackets(const Tokens& toks) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match(toks.size(), npos);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (IsOpen(toks[i])) {
      stack.push_back(i);
    } else if (IsClose(toks[i])) {
      if (stack.empty()) Fail("unmatched '" + toks[i].text + "'", toks[i].offset);
      std::size_t open = stack.back();
      if (Closer(toks[open].text) != toks[i].text[0]) {
        Fail("mismatched '" + toks[i].text + "'", toks[i].offset);
      }
      stack.pop_back();
      match[open] = i;
      match[i] = open;
    }
  }
  if (!stack.empty()) {
    Fail("unclosed '" + toks[stack.back()].text + "'", toks[stack.back()].offset);
  }
  return match;
}

// Facts collected about every identifier name in one segment.
struct NameFacts {
  bool declared = false;
  bool initialized = false;
  bool excluded = false;  // parameter, field, call, type, macro, import, ...
  bool outside_function = false;
  std::vector<Occurrence> occurrences;
};

using FactTable = std::map<std::string, NameFacts>;

std::vector<VariableSite> Collect(FactTable& facts, Language lang,
                                  std::size_t segment) {
  std::vector<VariableSite> sites;
  for (auto& [name, f] : facts) {
    if (f.excluded || f.outside_function || IsReservedWord(name, lang)) continue;
    if (!(f.declared && f.initialized)) continue;
    VariableSite site;
    site.name = name;
    site.occurrences = f.occurrences;
    site.declared_in_scope = true;
    site.initialized_in_scope = true;
    site.segment = segment;
    sites.push_back(std::move(site));
  }
  return sites;
}

// ---------------------------------------------------------------------------
// C and Java

const std::unordered_set<std::string_view> kControlWords = {
    "if", "while", "for", "switch", "catch", "synchronized", "return",
    "sizeof", "do", "else", "try", "foreach"};

bool IsPrimitive(const Token& t, Language lang) {
  if (t.kind != TokenKind::kKeyword) return false;
  static const std::unordered_set<std::string_view> c = {
      "void", "char", "short", "int", "long", "float", "double", "signed",
      "unsigned", "_Bool", "_Complex"};
  static const std::unordered_set<std::string_view> java = {
      "boolean", "byte", "char", "short", "int", "long", "float", "double",
      "void"};
  return lang == Language::kJava ? java.contains(t.text) : c.contains(t.text);
}

bool IsModifier(const Token& t, Language lang) {
  if (t.kind != TokenKind::kKeyword) return false;
  static const std::unordered_set<std::string_view> c = {
      "const", "static", "volatile", "register", "extern", "auto",
      "inline", "restrict", "_Atomic", "_Thread_local"};
  static const std::unordered_set<std::string_view> java = {
      "final", "static", "volatile", "transient", "public", "private",
      "protected", "abstract", "synchronized", "native", "strictfp"};
  return lang == Language::kJava ? java.contains(t.text) : c.contains(t.text);
}

struct Declarator {
  std::size_t name_index = 0;
  bool initialized = false;
};

struct Declaration {
  std::vector<Declarator> declarators;
  std::vector<std::size_t> type_names;  // identifier tokens in type position
  bool is_extern = false;
  std::size_t end = 0;  // index of the terminating token
};

class BracedAnalyzer {
 public:
  BracedAnalyzer(const Tokens& toks, Language lang)
      : toks_(toks), lang_(lang), match_(MatchBrackets(toks)) {}

  void CheckStatements() const {
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind != TokenKind::kKeyword) continue;
      bool needs_paren = t.text == "if" || t.text == "while" ||
                         t.text == "switch" || t.text == "for" ||
                         (lang_ == Language::kJava &&
                          (t.text == "catch" ||
                           (t.text == "synchronized" && i + 1 < toks_.size() &&
                            toks_[i + 1].text == "(")));
      if (needs_paren && (i + 1 >= toks_.size() || !toks_[i + 1].IsOp("("))) {
        Fail("expected '(' after '" + t.text + "'", t.offset);
      }
    }
  }

  FactTable Analyze() {
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::kDirective) {
        ScanDirective(t.text);
      }
      if (t.kind != TokenKind::kIdentifier) continue;
      NameFacts& f = facts_[t.text];
      f.occurrences.push_back({t.offset, t.text.size()});
      if (i > 0 && (toks_[i - 1].IsOp(".") || toks_[i - 1].IsOp("->") ||
                    toks_[i - 1].IsOp("::"))) {
        f.excluded = true;  // member access: conflicts with a field name
      }
      if (i + 1 < toks_.size() && toks_[i + 1].IsOp("(")) f.excluded = true;
      if (i > 0 && (toks_[i - 1].IsKw("goto") || toks_[i - 1].IsKw("break") ||
                    toks_[i - 1].IsKw("continue") || toks_[i - 1].IsKw("new") ||
                    toks_[i - 1].IsKw("instanceof") || toks_[i - 1].IsOp("@"))) {
        f.excluded = true;
      }
    }
    in_function_.assign(toks_.size(), false);
    ScanScope(0, toks_.size(), Scope::kTop);
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (toks_[i].kind == TokenKind::kIdentifier && !in_function_[i]) {
        facts_[toks_[i].text].outside_function = true;
      }
    }
    for (const std::string& word : macro_words_) {
      auto it = facts_.find(word);
      if (it != facts_.end()) it->second.excluded = true;
    }
    return std::move(facts_);
  }

 private:
  enum class Scope { kTop, kClass, kStruct, kFunction };

  void ScanDirective(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (IsIdentStart(text[i])) {
        std::size_t j = i;
        while (j < text.size() && IsIdentChar(text[j])) ++j;
        macro_words_.insert(std::string(text.substr(i, j - i)));
        i = j;
      } else {
        ++i;
      }
    }
  }

  bool IsIdent(std::size_t i) const {
    return i < toks_.size() && toks_[i].kind == TokenKind::kIdentifier;
  }
  bool Op(std::size_t i, std::string_view op) const {
    return i < toks_.size() && toks_[i].IsOp(op);
  }

  void Exclude(std::size_t i) {
    if (IsIdent(i)) facts_[toks_[i].text].excluded = true;
  }

  // Marks parameter names in a (...) list ending at `close`.
  void MarkParameters(std::size_t open, std::size_t close) {
    for (std::size_t i = open + 1; i < close; ++i) {
      if (IsOpen(toks_[i]) && toks_[i].text != "[") {
        // nested parens: function-pointer params; exclude everything inside
        for (std::size_t k = i; k <= match_[i]; ++k) Exclude(k);
        i = match_[i];
        continue;
      }
      if (!IsIdent(i)) continue;
      std::size_t next = i + 1;
      while (Op(next, "[")) next = match_[next] + 1;
      if (next == close || Op(next, ",") || Op(next, "...")) Exclude(i);
    }
  }

  // Skips a balanced <...> generic argument list starting at `i` (on '<').
  // Returns the index after it, or nullopt when the tokens do not look like
  // type arguments.
  std::optional<std::size_t> SkipGenerics(std::size_t i, std::size_t end,
                                          std::vector<std::size_t>& types) const {
    int depth = 0;
    for (; i < end; ++i) {
      const Token& t = toks_[i];
      if (t.IsOp("<")) {
        ++depth;
      } else if (t.IsOp(">")) {
        depth -= 1;
      } else if (t.IsOp(">>")) {
        depth -= 2;
      } else if (t.IsOp(">>>")) {
        depth -= 3;
      } else if (t.kind == TokenKind::kIdentifier) {
        types.push_back(i);
      } else if (!(t.IsOp(",") || t.IsOp(".") || t.IsOp("?") || t.IsOp("[") ||
                   t.IsOp("]") || t.IsOp("&") || t.IsKw("extends") ||
                   t.IsKw("super") || IsPrimitive(t, lang_))) {
        return std::nullopt;
      }
      if (depth < 0) return std::nullopt;
      if (depth == 0) return i + 1;
    }
    return std::nullopt;
  }

  // Skips an initializer expression; stops at ',' or ';' or ')' at depth 0.
  std::size_t SkipExpression(std::size_t i, std::size_t end) const {
    while (i < end) {
      if (IsOpen(toks_[i])) {
        i = match_[i] + 1;
        continue;
      }
      if (toks_[i].IsOp(",") || toks_[i].IsOp(";") || IsClose(toks_[i])) return i;
      ++i;
    }
    return end;
  }

  std::optional<Declaration> TryDeclaration(std::size_t i, std::size_t end,
                                            bool in_header) const {
    Declaration decl;
    std::size_t j = i;
    while (j < end) {
      if (IsModifier(toks_[j], lang_)) {
        if (toks_[j].text == "extern") decl.is_extern = true;
        ++j;
      } else if (lang_ == Language::kJava && Op(j, "@") && IsIdent(j + 1)) {
        j += 2;
        if (Op(j, "(")) j = match_[j] + 1;
      } else {
        break;
      }
    }
    if (j >= end) return std::nullopt;
    // type
    if (IsPrimitive(toks_[j], lang_)) {
      while (j < end && (IsPrimitive(toks_[j], lang_) || IsModifier(toks_[j], lang_))) ++j;
    } else if (lang_ == Language::kC &&
               (toks_[j].IsKw("struct") || toks_[j].IsKw("union") ||
                toks_[j].IsKw("enum")) &&
               IsIdent(j + 1)) {
      decl.type_names.push_back(j + 1);
      j += 2;
    } else if (IsIdent(j)) {
      decl.type_names.push_back(j);
      ++j;
      while (lang_ == Language::kJava && Op(j, ".") && IsIdent(j + 1)) {
        decl.type_names.push_back(j + 1);
        j += 2;
      }
      if (lang_ == Language::kJava && Op(j, "<")) {
        auto after = SkipGenerics(j, end, decl.type_names);
        if (!after) return std::nullopt;
        j = *after;
      }
    } else {
      return std::nullopt;
    }
    while (j < end && IsModifier(toks_[j], lang_)) ++j;
    while (lang_ == Language::kJava && Op(j, "[") && Op(j + 1, "]")) j += 2;

    while (true) {
      while (lang_ == Language::kC && (Op(j, "*") || (j < end && IsModifier(toks_[j], lang_)))) ++j;
      if (!IsIdent(j)) return std::nullopt;
      Declarator d;
      d.name_index = j;
      ++j;
      while (Op(j, "[")) j = match_[j] + 1;
      if (j >= end) return std::nullopt;
      if (Op(j, "=")) {
        d.initialized = true;
        j = SkipExpression(j + 1, end);
        decl.declarators.push_back(d);
        if (Op(j, ",")) {
          ++j;
          continue;
        }
        if (Op(j, ";") || (in_header && Op(j, ")"))) {
          decl.end = j;
          return decl;
        }
        return std::nullopt;
      }
      if (Op(j, ",")) {
        decl.declarators.push_back(d);
        ++j;
        continue;
      }
      if (Op(j, ";")) {
        decl.declarators.push_back(d);
        decl.end = j;
        return decl;
      }
      if (in_header && lang_ == Language::kJava && Op(j, ":")) {
        d.initialized = true;  // enhanced for
        decl.declarators.push_back(d);
        decl.end = j;
        return decl;
      }
      return std::nullopt;
    }
  }

  void RecordDeclaration(const Declaration& decl, Scope scope) {
    for (std::size_t t : decl.type_names) Exclude(t);
    for (const Declarator& d : decl.declarators) {
      NameFacts& f = facts_[toks_[d.name_index].text];
      if (scope == Scope::kFunction) {
        if (decl.is_extern) {
          f.excluded = true;
          continue;
        }
        f.declared = true;
        if (d.initialized) f.initialized = true;
      } else if (scope != Scope::kTop) {
        f.excluded = true;  // field or member
      }
    }
  }

  // Header tokens of the construct that owns the brace at `brace`.
  std::size_t HeaderStart(std::size_t brace, std::size_t lo) const {
    std::size_t k = brace;
    while (k > lo) {
      const Token& t = toks_[k - 1];
      if (t.IsOp(";") || t.IsOp("{") || t.IsOp("}")) break;
      if (IsClose(t) && t.text != "}") {
        k = match_[k - 1];
        continue;
      }
      --k;
    }
    return k;
  }

  bool HeaderHas(std::size_t from, std::size_t to, std::string_view kw) const {
    for (std::size_t k = from; k < to; ++k) {
      if (toks_[k].IsKw(kw)) return true;
      if (IsOpen(toks_[k])) k = match_[k];
    }
    return false;
  }

  // If the brace at `brace` opens a function body, returns the index of the
  // parameter list's '('.
  std::optional<std::size_t> FunctionParams(std::size_t brace, std::size_t lo) const {
    std::size_t k = brace;
    if (lang_ == Language::kJava) {
      // skip "throws A, B"
      std::size_t scan = k;
      while (scan > lo && (IsIdent(scan - 1) || Op(scan - 1, ",") || Op(scan - 1, "."))) --scan;
      if (scan > lo && toks_[scan - 1].IsKw("throws")) k = scan - 1;
    } else {
      while (k > lo && toks_[k - 1].kind == TokenKind::kKeyword &&
             IsModifier(toks_[k - 1], lang_)) {
        --k;
      }
    }
    if (k == lo || !Op(k - 1, ")")) return std::nullopt;
    std::size_t open = match_[k - 1];
    if (open == lo || !IsIdent(open - 1)) return std::nullopt;
    if (kControlWords.contains(toks_[open - 1].text)) return std::nullopt;
    return open;
  }

  void ScanScope(std::size_t lo, std::size_t hi, Scope scope) {
    if (scope == Scope::kFunction) {
      ScanFunctionBody(lo, hi);
      return;
    }
    std::size_t stmt = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      const Token& t = toks_[i];
      if (t.IsOp(";")) {
        if (scope == Scope::kClass || scope == Scope::kTop) {
          if (auto decl = TryDeclaration(stmt, i + 1, false)) {
            RecordDeclaration(*decl, scope);
          }
        }
        stmt = i + 1;
        continue;
      }
      if (IsOpen(t) && t.text != "{") {
        i = match_[i];
        continue;
      }
      if (t.IsOp("{")) {
        std::size_t close = match_[i];
        std::size_t header = HeaderStart(i, lo);
        if (scope == Scope::kStruct) {
          for (std::size_t k = i; k <= close; ++k) Exclude(k);
        } else if (auto params = FunctionParams(i, lo)) {
          Exclude(*params - 1);
          MarkParameters(*params, match_[*params]);
          for (std::size_t k = header; k < *params; ++k) Exclude(k);
          MarkFunction(i, close);
          ScanScope(i + 1, close, Scope::kFunction);
        } else if (HeaderHas(header, i, "class") || HeaderHas(header, i, "interface") ||
                   HeaderHas(header, i, "record")) {
          for (std::size_t k = header; k < i; ++k) Exclude(k);
          ScanScope(i + 1, close, Scope::kClass);
        } else if (HeaderHas(header, i, "enum")) {
          for (std::size_t k = header; k <= close; ++k) Exclude(k);
          if (lang_ == Language::kJava) ScanScope(i + 1, close, Scope::kClass);
        } else if (lang_ == Language::kC &&
                   (HeaderHas(header, i, "struct") || HeaderHas(header, i, "union"))) {
          for (std::size_t k = i; k <= close; ++k) Exclude(k);
        } else if (lang_ == Language::kJava && scope == Scope::kClass &&
                   (header == i || (header + 1 == i && toks_[header].IsKw("static")))) {
          // initializer block
          MarkFunction(i, close);
          ScanScope(i + 1, close, Scope::kFunction);
        }
        i = close;
        // a struct/class definition may be followed by declarators
        stmt = (close + 1 < hi && Op(close + 1, ";")) ? close + 2 : close + 1;
        if (stmt > close + 1) i = close + 1;
        continue;
      }
    }
  }

  void MarkFunction(std::size_t open, std::size_t close) {
    for (std::size_t k = open; k <= close; ++k) in_function_[k] = true;
  }

  bool IsStatementStart(std::size_t i, std::size_t lo) const {
    if (i == lo) return true;
    const Token& p = toks_[i - 1];
    if (p.IsOp(";") || p.IsOp("{") || p.IsOp("}")) return true;
    if (p.IsKw("else") || p.IsKw("do")) return true;
    if (p.IsOp(":") && i >= 2 &&
        (IsIdent(i - 2) || toks_[i - 2].IsKw("default") ||
         toks_[i - 2].kind == TokenKind::kNumber ||
         toks_[i - 2].kind == TokenKind::kString)) {
      return true;  // after label / case
    }
    return false;
  }

  void ScanFunctionBody(std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Token& t = toks_[i];
      // for (...) / try (...) headers may declare variables
      if ((t.IsKw("for") || t.IsKw("try")) && Op(i + 1, "(")) {
        std::size_t open = i + 1;
        std::size_t close = match_[open];
        std::size_t s = open + 1;
        while (s < close) {
          auto decl = TryDeclaration(s, close + 1, true);
          if (!decl) break;
          RecordDeclaration(*decl, Scope::kFunction);
          if (Op(decl->end, ":")) break;
          s = decl->end + 1;
          if (t.IsKw("for")) break;
        }
        continue;
      }
      if (t.IsKw("catch") && Op(i + 1, "(")) {
        MarkParameters(i + 1, match_[i + 1]);
        continue;
      }
      if (lang_ == Language::kJava && t.IsOp("->") && i > lo) {
        if (IsIdent(i - 1)) Exclude(i - 1);
        if (Op(i - 1, ")")) MarkParameters(match_[i - 1], i - 1);
        continue;
      }
      if (t.IsOp("{")) {
        std::size_t close = match_[i];
        // anonymous or local class body
        std::size_t header = HeaderStart(i, lo);
        bool anonymous = Op(i - 1, ")") && match_[i - 1] > lo &&
                         HeaderHas(header, i, "new");
        if (lang_ == Language::kJava && (anonymous || HeaderHas(header, i, "class"))) {
          ScanScope(i + 1, close, Scope::kClass);
          i = close;
          continue;
        }
        if (lang_ == Language::kC &&
            (HeaderHas(header, i, "struct") || HeaderHas(header, i, "union") ||
             HeaderHas(header, i, "enum"))) {
          for (std::size_t k = i; k <= close; ++k) Exclude(k);
          i = close;
          continue;
        }
        continue;  // plain block: keep scanning inside
      }
      if (IsIdent(i) && Op(i + 1, ":") && IsStatementStart(i, lo)) {
        Exclude(i);  // label
        continue;
      }
      if (IsIdent(i) && Op(i + 1, "=") && !(i > lo && (Op(i - 1, ".") || Op(i - 1, "->")))) {
        facts_[t.text].initialized = true;
      }
      if (IsStatementStart(i, lo)) {
        if (auto decl = TryDeclaration(i, hi, false)) {
          RecordDeclaration(*decl, Scope::kFunction);
          // keep scanning inside initializers (lambdas, anonymous classes)
        }
      }
    }
  }

  const Tokens& toks_;
  Language lang_;
  std::vector<std::size_t> match_;
  std::vector<bool> in_function_;
  FactTable facts_;
  std::set<std::string> macro_words_;
};

// ---------------------------------------------------------------------------
// Python

const std::unordered_set<std::string_view> kPyCompound = {
    "if", "elif", "else", "for", "while", "def", "class", "try", "except",
    "finally", "with", "async"};

struct LogicalLine {
  std::size_t begin = 0;  // token range, NEWLINE excluded
  std::size_t end = 0;
  bool indented_after = false;  // followed by INDENT
};

class PythonAnalyzer {
 public:
  explicit PythonAnalyzer(const Tokens& toks) : toks_(toks) { Split(); }

  void CheckStructure() const {
    MatchBrackets(toks_);
    for (std::size_t li = 0; li < lines_.size(); ++li) {
      const LogicalLine& line = lines_[li];
      const Token& first = toks_[line.begin];
      const Token& last = toks_[line.end - 1];
      bool ends_colon = last.IsOp(":");
      if (line.indented_after && !ends_colon) {
        Fail("unexpected indent", line.end < toks_.size() ? toks_[line.end].offset : last.offset);
      }
      bool compound = first.kind == TokenKind::kKeyword && kPyCompound.contains(first.text);
      bool soft = first.kind == TokenKind::kIdentifier &&
                  (first.text == "match" || first.text == "case") && ends_colon;
      if ((compound || soft) && ends_colon && !line.indented_after) {
        Fail("expected an indented block", last.offset);
      }
      if (first.IsKw("def")) {
        if (line.end - line.begin < 4 || toks_[line.begin + 1].kind != TokenKind::kIdentifier ||
            !toks_[line.begin + 2].IsOp("(")) {
          Fail("malformed def", first.offset);
        }
      }
      if (first.IsKw("class") &&
          (line.end - line.begin < 3 || toks_[line.begin + 1].kind != TokenKind::kIdentifier)) {
        Fail("malformed class", first.offset);
      }
      for (std::size_t i = line.begin + 1; i < line.end; ++i) {
        const Token& a = toks_[i - 1];
        const Token& b = toks_[i];
        bool a_atom = a.kind == TokenKind::kIdentifier || a.kind == TokenKind::kNumber;
        bool b_atom = b.kind == TokenKind::kIdentifier || b.kind == TokenKind::kNumber;
        if (a_atom && b_atom) {
          bool soft_kw = i - 1 == line.begin && a.kind == TokenKind::kIdentifier &&
                         (a.text == "match" || a.text == "case" || a.text == "type");
          if (!soft_kw) Fail("unexpected token '" + b.text + "'", b.offset);
        }
      }
    }
  }

  FactTable Analyze() {
    std::vector<std::string> f_strings;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::kString) {
        std::size_t q = t.text.find_first_of("'\"");
        std::string prefix = t.text.substr(0, q);
        if (prefix.find_first_of("fF") != std::string::npos) f_strings.push_back(t.text);
        continue;
      }
      if (t.kind != TokenKind::kIdentifier) continue;
      NameFacts& f = facts_[t.text];
      f.occurrences.push_back({t.offset, t.text.size()});
      if (i > 0 && toks_[i - 1].IsOp(".")) f.excluded = true;
      if (i + 1 < toks_.size() && (toks_[i + 1].IsOp("(") || toks_[i + 1].IsOp(":="))) {
        f.excluded = true;
      }
      if (i > 0 && toks_[i - 1].IsOp("@")) f.excluded = true;
    }

    // block context stack: kind per indentation level
    enum class Ctx { kModule, kFunction, kClass, kOther };
    std::vector<Ctx> stack{Ctx::kModule};
    std::vector<Ctx> owners{Ctx::kModule};  // nearest def/class owner per level
    std::size_t li = 0;
    Ctx pending = Ctx::kOther;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::kIndent) {
        stack.push_back(pending);
        owners.push_back(pending == Ctx::kOther ? owners.back() : pending);
        continue;
      }
      if (t.kind == TokenKind::kDedent) {
        if (stack.size() > 1) {
          stack.pop_back();
          owners.pop_back();
        }
        continue;
      }
      if (li < lines_.size() && i == lines_[li].begin) {
        const LogicalLine& line = lines_[li];
        const Token& first = toks_[line.begin];
        pending = first.IsKw("def") ? Ctx::kFunction
                  : first.IsKw("class") ? Ctx::kClass
                  : (first.IsKw("async") && line.begin + 1 < line.end &&
                     toks_[line.begin + 1].IsKw("def"))
                      ? Ctx::kFunction
                      : Ctx::kOther;
        AnalyzeLine(line, owners.back() == Ctx::kClass);
        i = line.end;  // NEWLINE
        ++li;
      }
    }
    for (const std::string& s : f_strings) {
      for (auto& [name, f] : facts_) {
        if (ContainsWord(s, name)) f.excluded = true;
      }
    }
    return std::move(facts_);
  }

 private:
  void Split() {
    std::size_t begin = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      TokenKind k = toks_[i].kind;
      if (k == TokenKind::kIndent || k == TokenKind::kDedent) {
        if (k == TokenKind::kIndent && !lines_.empty() && begin == static_cast<std::size_t>(-1)) {
          lines_.back().indented_after = true;
        } else if (k == TokenKind::kIndent && lines_.empty()) {
          Fail("unexpected indent", toks_[i].offset);
        }
        continue;
      }
      if (k == TokenKind::kNewline) {
        if (begin != static_cast<std::size_t>(-1)) lines_.push_back({begin, i, false});
        begin = static_cast<std::size_t>(-1);
        continue;
      }
      if (begin == static_cast<std::size_t>(-1)) begin = i;
    }
    if (begin != static_cast<std::size_t>(-1)) lines_.push_back({begin, toks_.size(), false});
  }

  bool IsIdent(std::size_t i, const LogicalLine& line) const {
    return i >= line.begin && i < line.end && toks_[i].kind == TokenKind::kIdentifier;
  }

  void Exclude(std::size_t i) {
    if (toks_[i].kind == TokenKind::kIdentifier) facts_[toks_[i].text].excluded = true;
  }

  void Assign(std::size_t i, bool in_class) {
    NameFacts& f = facts_[toks_[i].text];
    if (in_class) {
      f.excluded = true;  // class attribute
      return;
    }
    f.declared = true;
    f.initialized = true;
  }

  // Bare names in an assignment target range: a, (a, b), [a, *b]
  void AssignTargets(std::size_t from, std::size_t to, bool in_class) {
    for (std::size_t k = from; k < to; ++k) {
      if (toks_[k].kind != TokenKind::kIdentifier) continue;
      bool left_ok = k == from || toks_[k - 1].IsOp(",") || toks_[k - 1].IsOp("(") ||
                     toks_[k - 1].IsOp("[") || toks_[k - 1].IsOp("*");
      bool right_ok = k + 1 == to || toks_[k + 1].IsOp(",") || toks_[k + 1].IsOp(")") ||
                      toks_[k + 1].IsOp("]");
      if (left_ok && right_ok) {
        Assign(k, in_class);
      }
    }
  }

  void AnalyzeLine(const LogicalLine& line, bool in_class) {
    const Token& first = toks_[line.begin];
    std::size_t b = line.begin;
    std::size_t e = line.end;
    if (first.IsKw("import") || first.IsKw("from") || first.IsKw("global") ||
        first.IsKw("nonlocal")) {
      for (std::size_t k = b; k < e; ++k) Exclude(k);
      return;
    }
    std::size_t start = b;
    if (first.IsKw("async")) ++start;
    if (toks_[start].IsKw("def") || toks_[start].IsKw("class")) {
      Exclude(start + 1);
      if (start + 2 < e && toks_[start + 2].IsOp("(")) {
        int depth = 0;
        for (std::size_t k = start + 2; k < e; ++k) {
          if (IsOpen(toks_[k])) ++depth;
          if (IsClose(toks_[k])) --depth;
          if (depth == 1 && toks_[k].kind == TokenKind::kIdentifier) {
            const Token& prev = toks_[k - 1];
            bool after = prev.IsOp("(") || prev.IsOp(",") || prev.IsOp("*") || prev.IsOp("**");
            if (after) Exclude(k);  // parameter or base class
          }
          if (depth == 0) break;
        }
      }
    }
    // per-token scans with bracket depth
    int depth = 0;
    std::vector<std::size_t> top_assign;
    for (std::size_t k = b; k < e; ++k) {
      const Token& t = toks_[k];
      if (IsOpen(t)) ++depth;
      if (IsClose(t)) --depth;
      if (t.IsKw("lambda")) {
        int d = 0;
        for (std::size_t m = k + 1; m < e; ++m) {
          if (IsOpen(toks_[m])) ++d;
          if (IsClose(toks_[m])) --d;
          if (d == 0 && toks_[m].IsOp(":")) break;
          Exclude(m);
        }
      }
      if (t.IsKw("for") && (depth > 0 || k != start)) {
        // comprehension variables
        for (std::size_t m = k + 1; m < e && !toks_[m].IsKw("in"); ++m) Exclude(m);
      }
      if (t.kind == TokenKind::kIdentifier && depth > 0 && k + 1 < e &&
          toks_[k + 1].IsOp("=")) {
        Exclude(k);  // keyword argument
      }
      if (t.IsKw("as") && k + 1 < e) {
        if (first.IsKw("except")) {
          Exclude(k + 1);
        } else if (first.IsKw("with") || (first.IsKw("async") && toks_[b + 1].IsKw("with"))) {
          if (IsIdent(k + 1, line)) Assign(k + 1, in_class);
        } else {
          Exclude(k + 1);
        }
      }
      if (depth == 0 && t.IsOp("=")) top_assign.push_back(k);
    }
    if (toks_[start].IsKw("for")) {
      std::size_t in = start + 1;
      while (in < e && !toks_[in].IsKw("in")) ++in;
      AssignTargets(start + 1, in, in_class);
      return;
    }
    if (first.kind == TokenKind::kKeyword) return;
    std::size_t from = b;
    for (std::size_t eq : top_assign) {
      std::size_t to = eq;
      // annotated assignment: x: T = v
      for (std::size_t k = from; k < eq; ++k) {
        if (toks_[k].IsOp(":")) {
          to = k;
          break;
        }
      }
      AssignTargets(from, to, in_class);
      from = eq + 1;
    }
    if (top_assign.empty() && e - b >= 2 && toks_[b].kind == TokenKind::kIdentifier &&
        toks_[b + 1].IsOp(":") && in_class) {
      Exclude(b);  // annotated field
    }
  }

  const Tokens& toks_;
  std::vector<LogicalLine> lines_;
  FactTable facts_;
};

void ShiftOccurrences(std::vector<VariableSite>& sites, std::size_t offset) {
  for (auto& s : sites) {
    for (auto& o : s.occurrences) o.offset += offset;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

void CheckSegment(std::string_view text, Language lang) {
  Tokens toks = Tokenize(text, lang);
  if (lang == Language::kPython) {
    PythonAnalyzer(toks).CheckStructure();
  } else {
    BracedAnalyzer(toks, lang).CheckStatements();
  }
}

}  // namespace

std::vector<Segment> SplitSegments(std::string_view code) {
  std::vector<Segment> out;
  std::size_t seg_start = 0;
  std::size_t pos = 0;
  while (pos <= code.size()) {
    std::size_t nl = code.find('\n', pos);
    std::size_t line_end = nl == std::string_view::npos ? code.size() : nl;
    if (Trim(code.substr(pos, line_end - pos)) == kPairSentinel) {
      out.push_back({seg_start, code.substr(seg_start, pos - seg_start)});
      seg_start = nl == std::string_view::npos ? code.size() : nl + 1;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  out.push_back({seg_start, code.substr(seg_start)});
  return out;
}

void CheckSyntax(std::string_view code, Language lang) {
  if (!IsMutable(lang)) {
    throw Error(ErrorCode::kUnsupportedLanguage,
                "no grammar for " + std::string(LanguageName(lang)));
  }
  for (const Segment& seg : SplitSegments(code)) {
    try {
      CheckSegment(seg.text, lang);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseError) throw;
      throw Error(ErrorCode::kParseError, e.detail(), e.position().value_or(0) + seg.offset);
    }
  }
}

bool Parses(std::string_view code, Language lang) noexcept {
  try {
    CheckSyntax(code, lang);
    return true;
  } catch (...) {
    return false;
  }
}

std::vector<VariableSite> ExtractVariables(std::string_view code, Language lang) {
  CheckSyntax(code, lang);
  std::vector<VariableSite> all;
  std::vector<Segment> segments = SplitSegments(code);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    Tokens toks = Tokenize(segments[s].text, lang);
    FactTable facts = lang == Language::kPython ? PythonAnalyzer(toks).Analyze()
                                                : BracedAnalyzer(toks, lang).Analyze();
    std::vector<VariableSite> sites = Collect(facts, lang, s);
    ShiftOccurrences(sites, segments[s].offset);
    for (auto& site : sites) all.push_back(std::move(site));
  }
  std::stable_sort(all.begin(), all.end(), [](const VariableSite& a, const VariableSite& b) {
    return a.occurrences.front().offset < b.occurrences.front().offset;
  });
  return all;
}

}  // namespace iclforge::mutation
