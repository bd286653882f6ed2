#include "iclforge/modelgw/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "iclforge/error.hpp"

namespace iclforge::modelgw {

namespace {

// Subword markers used by common tokenizers: GPT-2 space, SentencePiece
// space, WordPiece continuation.
std::string StripMarkers(std::string piece) {
  for (std::string_view marker : {"\xC4\xA0", "\xE2\x96\x81", "##"}) {
    while (piece.rfind(marker, 0) == 0) piece.erase(0, marker.size());
  }
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  piece.erase(piece.begin(), std::find_if(piece.begin(), piece.end(), not_space));
  piece.erase(std::find_if(piece.rbegin(), piece.rend(), not_space).base(), piece.end());
  return piece;
}

}  // namespace

CallCounts Gateway::Counters::Snapshot() const {
  return {complete.load(), classify.load(), infill.load(), embed.load(), logprobs.load()};
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::string mask_token)
    : backend_(std::move(backend)),
      mask_token_(std::move(mask_token)),
      global_(std::make_shared<Counters>()),
      local_(global_) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "gateway needs a backend");
  if (mask_token_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty mask token");
}

void Gateway::Count(std::atomic<std::uint64_t> Counters::*field) {
  ((*global_).*field).fetch_add(1, std::memory_order_relaxed);
  if (local_ != global_) ((*local_).*field).fetch_add(1, std::memory_order_relaxed);
}

CallCounts Gateway::Counts() const { return local_->Snapshot(); }
CallCounts Gateway::GlobalCounts() const { return global_->Snapshot(); }

Gateway Gateway::Scoped() const {
  Gateway g(*this);
  g.local_ = std::make_shared<Counters>();
  return g;
}

std::string Gateway::Complete(const Transcript& t, const CompletionParams& p) {
  ValidateTranscript(t);
  if (p.temperature < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative temperature");
  if (p.max_tokens == 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 1");
  Count(&Counters::complete);
  return backend_->Complete(t, p);
}

ClassifierReadout Gateway::Classify(const Transcript& t, const std::vector<std::string>& labels) {
  ValidateTranscript(t);
  if (labels.size() < 2) throw Error(ErrorCode::kInvalidArgument, "classify needs >= 2 labels");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate labels");
  }
  Count(&Counters::classify);
  auto raw = backend_->Classify(t, labels);
  ClassifierReadout r;
  double mass = 0.0;
  for (const auto& label : labels) {
    auto it = raw.find(label);
    if (it == raw.end() || !std::isfinite(it->second) || it->second < 0.0) {
      throw Error(ErrorCode::kLabelsUnscorable, "no usable score for label '" + label + "'");
    }
    mass += it->second;
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::kLabelsUnscorable, "label scores sum to zero");
  r.raw_mass = mass;
  r.renormalized = std::fabs(mass - 1.0) > 1e-6;
  for (const auto& label : labels) r.per_label[label] = raw.at(label) / mass;
  for (const auto& label : labels) {
    if (r.label.empty() || r.per_label[label] > r.confidence) {
      r.label = label;
      r.confidence = r.per_label[label];
    }
  }
  return r;
}

std::vector<SubstituteProposal> Gateway::ProposeSubstitutes(std::string_view code_with_mask,
                                                            std::size_t top_i, Language lang) {
  if (top_i == 0) throw Error(ErrorCode::kInvalidArgument, "top_i must be >= 1");
  std::size_t first = code_with_mask.find(mask_token_);
  if (first == std::string_view::npos) throw Error(ErrorCode::kNoMask, mask_token_);
  if (code_with_mask.find(mask_token_, first + mask_token_.size()) != std::string_view::npos) {
    throw Error(ErrorCode::kMultipleMasks, mask_token_);
  }
  Count(&Counters::infill);
  auto raw = backend_->Infill(code_with_mask.substr(0, first),
                              code_with_mask.substr(first + mask_token_.size()), top_i);
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawProposal& a, const RawProposal& b) { return a.score > b.score; });
  std::vector<SubstituteProposal> out;
  std::set<std::string> seen;
  for (const auto& p : raw) {
    if (out.size() == top_i) break;
    std::string token;
    for (const auto& piece : p.pieces) token += StripMarkers(piece);
    if (!IsIdentifier(token, lang) || IsReservedWord(token, lang)) continue;
    if (!seen.insert(token).second) continue;
    out.push_back({token, out.size() + 1, p.score});
  }
  return out;
}

EmbeddingVector Gateway::Embed(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "embed needs non-empty text");
  Count(&Counters::embed);
  EmbeddingVector v{backend_->Embed(text), backend_->EncoderId()};
  double norm = 0.0;
  for (double x : v.values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kProtocolError, "non-finite embedding value");
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (v.values.empty() || norm == 0.0) throw Error(ErrorCode::kProtocolError, "zero embedding");
  for (double& x : v.values) x /= norm;
  return v;
}

std::vector<TokenLogProb> Gateway::LogLikelihoods(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "log-likelihoods need non-empty text");
  Count(&Counters::logprobs);
  return backend_->LogProbs(text);
}

}  // namespace iclforge::modelgw
