#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace iclforge::metrics {

// Shared tokenizer for every generation metric: lowercase, split on
// whitespace, and emit each punctuation character as its own token.
std::vector<std::string> Tokenize(std::string_view text);

inline constexpr std::string_view kTokenizerDescription =
    "whitespace+punctuation split, lowercased";

}  // namespace iclforge::metrics
