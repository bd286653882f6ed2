#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "iclforge/language.hpp"
#include "iclforge/mutation/analysis.hpp"

namespace iclforge::mutation {

struct Mutant {
  std::string code;
  std::string from;  // original variable name
  std::string to;    // substitute
  std::string parent_hash;
};

// Replaces every occurrence of `site` with `substitute` (right-to-left by
// offset). Throws kReservedWord, kSubstituteCollision, kInvalidArgument (not
// an identifier, or occurrences that do not match the site) and kParseError
// when the result does not re-parse.
Mutant Rename(std::string_view code, const VariableSite& site,
              std::string_view substitute, Language lang);

// code\var: the identifier occurrences of `site` deleted, punctuation kept.
// The result is only scored, so it need not parse.
std::string DeleteOccurrences(std::string_view code, const VariableSite& site);

// True iff `m` re-parses and its token stream differs from `parent` only at
// identifier tokens m.from -> m.to, renaming every m.from inside each
// affected segment.
bool ValidateMutant(const Mutant& m, std::string_view parent, Language lang);

// Generalization for multi-step mutation chains: `child` is `parent` with
// zero or more eligible variables consistently renamed to fresh names.
bool IsRenamingOf(std::string_view parent, std::string_view child, Language lang);

// Re-finds an eligible site by name in (possibly mutated) code.
std::optional<VariableSite> LocateSite(std::string_view code, std::string_view name,
                                       std::size_t segment, Language lang);

}  // namespace iclforge::mutation
