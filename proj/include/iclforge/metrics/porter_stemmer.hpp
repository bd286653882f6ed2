#pragma once

#include <string>
#include <string_view>

namespace iclforge::metrics {

// Porter (1980) suffix-stripping stemmer for lowercase English words.
// Words of length <= 2 and words with non-letters are returned unchanged.
std::string PorterStem(std::string_view word);

}  // namespace iclforge::metrics
