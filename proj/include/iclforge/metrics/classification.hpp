#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace iclforge::metrics {

struct ClassificationTally {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t Total() const { return tp + fp + tn + fn; }
  bool operator==(const ClassificationTally&) const = default;
};

ClassificationTally Tally(std::span<const std::string> predictions,
                          std::span<const std::string> truths,
                          std::string_view positive_label);

// Both require Total() >= 1 (kInvalidArgument otherwise). F1 is 0 when
// precision or recall has a zero denominator.
double Accuracy(const ClassificationTally& t);
double F1(const ClassificationTally& t);

// flipped / eligible; throws kEligibleZero.
double Asr(std::size_t flipped, std::size_t eligible);
// after - before: negative when performance falls.
double AccDrop(double before, double after);
// QT = total model queries / successful flips; throws kNoFlips.
double QueryTime(std::uint64_t total_queries, std::size_t successful_flips);

}  // namespace iclforge::metrics
