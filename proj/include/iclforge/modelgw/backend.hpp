#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/modelgw/types.hpp"

namespace iclforge::modelgw {

// Raw model access. The gateway validates inputs, normalizes outputs and
// counts calls; backends only talk to the model.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string Id() const = 0;
  virtual std::string EncoderId() const { return Id(); }

  virtual std::string Complete(const Transcript& t, const CompletionParams& p) = 0;
  // Unnormalized non-negative scores per label.
  virtual std::map<std::string, double> Classify(const Transcript& t,
                                                 const std::vector<std::string>& labels) = 0;
  virtual std::vector<RawProposal> Infill(std::string_view prefix, std::string_view suffix,
                                          std::size_t n) = 0;
  virtual std::vector<double> Embed(std::string_view text) = 0;
  virtual std::vector<TokenLogProb> LogProbs(std::string_view text) = 0;
};

}  // namespace iclforge::modelgw
