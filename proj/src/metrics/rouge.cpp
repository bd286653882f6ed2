#include "iclforge/metrics/rouge.hpp"

#include <algorithm>

#include "iclforge/error.hpp"
#include "iclforge/metrics/tokenize.hpp"

namespace iclforge::metrics {

std::size_t LcsLength(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double RougeL(std::string_view candidate, std::string_view reference, double beta2) {
  auto cand = Tokenize(candidate);
  auto ref = Tokenize(reference);
  if (cand.empty() || ref.empty()) throw Error(ErrorCode::kEmptyInput, "ROUGE-L on empty text");
  double lcs = static_cast<double>(LcsLength(cand, ref));
  if (lcs == 0.0) return 0.0;
  double p = lcs / static_cast<double>(cand.size());
  double r = lcs / static_cast<double>(ref.size());
  return (1.0 + beta2) * p * r / (r + beta2 * p);
}

}  // namespace iclforge::metrics
