#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iclforge::metrics {

// Recall-weighted F of LCS precision/recall: (1+b2)PR / (R + b2 P).
inline constexpr double kRougeBeta2 = 8.0;

std::size_t LcsLength(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Throws kEmptyInput when either side has no tokens.
double RougeL(std::string_view candidate, std::string_view reference,
              double beta2 = kRougeBeta2);

}  // namespace iclforge::metrics
