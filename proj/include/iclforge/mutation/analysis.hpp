#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/language.hpp"

namespace iclforge::mutation {

// Clone-detection pairs are stored as one code unit whose halves are joined
// by a line holding exactly this sentinel.
inline constexpr std::string_view kPairSentinel = "// ---";

struct Segment {
  std::size_t offset = 0;  // byte offset of `text` inside the full code
  std::string_view text;
};

// One segment for ordinary snippets, two (or more) for sentinel-joined pairs.
std::vector<Segment> SplitSegments(std::string_view code);

struct Occurrence {
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const Occurrence&) const = default;
};

struct VariableSite {
  std::string name;
  std::vector<Occurrence> occurrences;  // sorted, absolute byte offsets
  bool declared_in_scope = false;
  bool initialized_in_scope = false;
  std::size_t segment = 0;

  bool Eligible() const { return declared_in_scope && initialized_in_scope; }
  bool operator==(const VariableSite&) const = default;
};

// Throws Error(kParseError, position) when any segment is not syntactically
// valid for `lang`; Error(kUnsupportedLanguage) for languages without a
// grammar.
void CheckSyntax(std::string_view code, Language lang);
bool Parses(std::string_view code, Language lang) noexcept;

// Renameable local variables: declared and initialized inside a function
// body (C/Java) or a function/module body (Python); never parameters,
// fields/attributes, called names, macro-referenced names, imports,
// comprehension or lambda variables. Sorted by first occurrence.
std::vector<VariableSite> ExtractVariables(std::string_view code, Language lang);

}  // namespace iclforge::mutation
