#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace iclforge::metrics {

using TokenEmbedder = std::function<std::vector<double>(std::string_view token)>;

// (1/|x|) sum_i max_j x_i . y_j with x the candidate token embeddings and y
// the reference token embeddings, both unit-normalized here.
double BertScoreFromVectors(const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<double>>& y);

// Tokenizes both texts with the shared tokenizer and embeds each token.
// Throws kEmptyInput when either side has no tokens.
double BertScore(std::string_view candidate, std::string_view reference,
                 const TokenEmbedder& embed);

}  // namespace iclforge::metrics
