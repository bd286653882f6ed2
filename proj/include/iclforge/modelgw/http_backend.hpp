#pragma once

#include <memory>
#include <string>

#include "iclforge/modelgw/backend.hpp"

namespace iclforge::modelgw {

inline constexpr const char* kBackendUrlEnv = "ICLFORGE_BACKEND_URL";

// JSON over HTTP. Endpoints (all POST): /complete, /classify, /infill,
// /embed, /logprobs. Transport failures raise kBackendUnavailable, bodies
// that do not match the protocol raise kProtocolError.
class HttpBackend : public Backend {
 public:
  // `base_url` like "http://127.0.0.1:8080"; empty reads ICLFORGE_BACKEND_URL.
  explicit HttpBackend(std::string base_url = "", int timeout_seconds = 120);
  ~HttpBackend() override;

  std::string Id() const override;
  std::string EncoderId() const override;
  std::string Complete(const Transcript& t, const CompletionParams& p) override;
  std::map<std::string, double> Classify(const Transcript& t,
                                         const std::vector<std::string>& labels) override;
  // Falls back to a constrained /complete prompt when /infill answers 404.
  std::vector<RawProposal> Infill(std::string_view prefix, std::string_view suffix,
                                  std::size_t n) override;
  std::vector<double> Embed(std::string_view text) override;
  // kScoringUnsupported when /logprobs answers 501 or 404.
  std::vector<TokenLogProb> LogProbs(std::string_view text) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace iclforge::modelgw
