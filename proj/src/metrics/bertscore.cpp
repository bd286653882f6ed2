#include "iclforge/metrics/bertscore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iclforge/error.hpp"
#include "iclforge/metrics/tokenize.hpp"

namespace iclforge::metrics {

namespace {

std::vector<double> Unit(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

}  // namespace

double BertScoreFromVectors(const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<double>>& y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::kEmptyInput, "BERTScore needs tokens on both sides");
  std::vector<std::vector<double>> ys;
  ys.reserve(y.size());
  for (const auto& v : y) ys.push_back(Unit(v));
  double sum = 0.0;
  for (const auto& raw : x) {
    auto xi = Unit(raw);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& yj : ys) {
      if (yj.size() != xi.size()) throw Error(ErrorCode::kDimensionMismatch, "token embedding sizes differ");
      double dot = 0.0;
      for (std::size_t d = 0; d < xi.size(); ++d) dot += xi[d] * yj[d];
      best = std::max(best, dot);
    }
    sum += best;
  }
  return sum / static_cast<double>(x.size());
}

double BertScore(std::string_view candidate, std::string_view reference,
                 const TokenEmbedder& embed) {
  auto c = Tokenize(candidate);
  auto r = Tokenize(reference);
  if (c.empty() || r.empty()) throw Error(ErrorCode::kEmptyInput, "BERTScore needs tokens on both sides");
  std::vector<std::vector<double>> x, y;
  for (const auto& t : c) x.push_back(embed(t));
  for (const auto& t : r) y.push_back(embed(t));
  return BertScoreFromVectors(x, y);
}

}  // namespace iclforge::metrics
