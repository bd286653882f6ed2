#include "iclforge/metrics/classification.hpp"

#include "iclforge/error.hpp"

namespace iclforge::metrics {

ClassificationTally Tally(std::span<const std::string> predictions,
                          std::span<const std::string> truths,
                          std::string_view positive_label) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction/truth length mismatch");
  }
  ClassificationTally t;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool pred_pos = predictions[i] == positive_label;
    bool true_pos = truths[i] == positive_label;
    if (pred_pos && true_pos) ++t.tp;
    else if (pred_pos) ++t.fp;
    else if (true_pos) ++t.fn;
    else ++t.tn;
  }
  return t;
}

double Accuracy(const ClassificationTally& t) {
  if (t.Total() == 0) throw Error(ErrorCode::kInvalidArgument, "empty tally");
  return static_cast<double>(t.tp + t.tn) / static_cast<double>(t.Total());
}

double F1(const ClassificationTally& t) {
  if (t.Total() == 0) throw Error(ErrorCode::kInvalidArgument, "empty tally");
  if (t.tp + t.fp == 0 || t.tp + t.fn == 0) return 0.0;
  double precision = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp);
  double recall = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double Asr(std::size_t flipped, std::size_t eligible) {
  if (eligible == 0) throw Error(ErrorCode::kEligibleZero, "no eligible queries");
  return static_cast<double>(flipped) / static_cast<double>(eligible);
}

double AccDrop(double before, double after) { return after - before; }

double QueryTime(std::uint64_t total_queries, std::size_t successful_flips) {
  if (successful_flips == 0) throw Error(ErrorCode::kNoFlips, "query time undefined");
  return static_cast<double>(total_queries) / static_cast<double>(successful_flips);
}

}  // namespace iclforge::metrics
