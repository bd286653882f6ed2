#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/language.hpp"
#include "iclforge/modelgw/backend.hpp"
#include "iclforge/modelgw/types.hpp"

namespace iclforge::modelgw {

inline constexpr std::size_t kDefaultTopI = 80;
inline constexpr std::string_view kDefaultMaskToken = "<mask>";

struct CallCounts {
  std::uint64_t complete = 0;
  std::uint64_t classify = 0;
  std::uint64_t infill = 0;
  std::uint64_t embed = 0;
  std::uint64_t logprobs = 0;

  // Calls that query the target model's prediction; QT counts only these.
  std::uint64_t ModelQueries() const { return complete + classify; }
  std::uint64_t Total() const { return complete + classify + infill + embed + logprobs; }
  CallCounts operator-(const CallCounts& o) const {
    return {complete - o.complete, classify - o.classify, infill - o.infill, embed - o.embed,
            logprobs - o.logprobs};
  }
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend,
                   std::string mask_token = std::string(kDefaultMaskToken));

  std::string Complete(const Transcript& t, const CompletionParams& p);
  ClassifierReadout Classify(const Transcript& t, const std::vector<std::string>& labels);
  // `code_with_mask` must hold the mask token exactly once. Proposals are
  // joined from subword pieces, filtered to non-reserved identifiers of
  // `lang`, deduplicated, cut to `top_i` and ranked 1..n by model score.
  std::vector<SubstituteProposal> ProposeSubstitutes(std::string_view code_with_mask,
                                                     std::size_t top_i, Language lang);
  // Unit-normalized.
  EmbeddingVector Embed(std::string_view text);
  std::vector<TokenLogProb> LogLikelihoods(std::string_view text);

  // Counts for this gateway view only.
  CallCounts Counts() const;
  // Counts across every view sharing the backend.
  CallCounts GlobalCounts() const;
  // A view sharing backend and global counts with a fresh local count, so
  // concurrent workers can each measure their own deltas.
  Gateway Scoped() const;

  const std::string& mask_token() const { return mask_token_; }
  std::string BackendId() const { return backend_->Id(); }
  std::string EncoderId() const { return backend_->EncoderId(); }

 private:
  struct Counters {
    std::atomic<std::uint64_t> complete{0};
    std::atomic<std::uint64_t> classify{0};
    std::atomic<std::uint64_t> infill{0};
    std::atomic<std::uint64_t> embed{0};
    std::atomic<std::uint64_t> logprobs{0};
    CallCounts Snapshot() const;
  };

  void Count(std::atomic<std::uint64_t> Counters::*field);

  std::shared_ptr<Backend> backend_;
  std::string mask_token_;
  std::shared_ptr<Counters> global_;
  std::shared_ptr<Counters> local_;
};

}  // namespace iclforge::modelgw
