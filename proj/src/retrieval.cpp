#include "iclforge/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "iclforge/error.hpp"
#include "iclforge/hash.hpp"

namespace iclforge::retrieval {

namespace {

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void Normalize(std::vector<double>& v) {
  double n = Norm(v);
  if (n == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero vector cannot be normalized");
  for (double& x : v) x /= n;
}

}  // namespace

double CosineSimilarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.encoder_id != b.encoder_id) {
    throw Error(ErrorCode::kEncoderMismatch, a.encoder_id + " vs " + b.encoder_id);
  }
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double na = Norm(a.values);
  double nb = Norm(b.values);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += (a.values[i] / na) * (b.values[i] / nb);
  return std::clamp(dot, -1.0, 1.0);
}

std::optional<EmbeddingVector> EmbeddingCache::Get(const std::string& encoder,
                                                   std::string_view text) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find({encoder, ContentHash(text)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::Put(const std::string& encoder, std::string_view text, EmbeddingVector v) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[{encoder, ContentHash(text)}] = std::move(v);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

EmbeddingVector Embedder::Embed(std::string_view text) {
  if (cache_ == nullptr) return gw_.Embed(text);
  std::string encoder = gw_.EncoderId();
  if (auto hit = cache_->Get(encoder, text)) return *hit;
  EmbeddingVector v = gw_.Embed(text);
  cache_->Put(encoder, text, v);
  return v;
}

void SortSelection(std::vector<ScoredDemo>& demos) {
  std::sort(demos.begin(), demos.end(), [](const ScoredDemo& a, const ScoredDemo& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.demo.id < b.demo.id;
  });
}

SelectionResult SelectTopNByVector(const EmbeddingVector& query, const corpus::Repository& repo,
                                   std::size_t n, Embedder& embedder, std::size_t tile) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (repo.demonstrations.empty()) throw Error(ErrorCode::kEmptyRepository, "nothing to select from");
  SelectionResult result;
  result.n = n;
  for (const auto& d : repo.demonstrations) {
    EmbeddingVector v = embedder.Embed(d.code);
    if (tile > 1) v = Tile(v, tile);
    result.demonstrations.push_back({d, CosineSimilarity(query, v)});
  }
  SortSelection(result.demonstrations);
  if (result.demonstrations.size() > n) result.demonstrations.resize(n);
  return result;
}

SelectionResult SelectTopN(const corpus::Query& query, const corpus::Repository& repo,
                           std::size_t n, Embedder& embedder) {
  if (repo.demonstrations.empty()) throw Error(ErrorCode::kEmptyRepository, "nothing to select from");
  return SelectTopNByVector(embedder.Embed(query.code), repo, n, embedder);
}

EmbeddingVector PoolEmbeddings(const std::vector<EmbeddingVector>& vs, PoolMode mode) {
  if (vs.empty()) throw Error(ErrorCode::kEmptyQuerySet, "no query embeddings to pool");
  for (const auto& v : vs) {
    if (v.encoder_id != vs[0].encoder_id) {
      throw Error(ErrorCode::kEncoderMismatch, v.encoder_id + " vs " + vs[0].encoder_id);
    }
    if (v.dim() != vs[0].dim()) throw Error(ErrorCode::kDimensionMismatch, "pooled vectors differ in size");
  }
  EmbeddingVector out;
  out.encoder_id = vs[0].encoder_id;
  if (mode == PoolMode::kConcat) {
    for (const auto& v : vs) out.values.insert(out.values.end(), v.values.begin(), v.values.end());
  } else {
    out.values.assign(vs[0].dim(), 0.0);
    for (const auto& v : vs) {
      for (std::size_t i = 0; i < v.dim(); ++i) out.values[i] += v.values[i];
    }
    for (double& x : out.values) x /= static_cast<double>(vs.size());
  }
  Normalize(out.values);
  return out;
}

EmbeddingVector PooledQueryEmbedding(const std::vector<corpus::Query>& queries, Embedder& embedder,
                                     PoolMode mode) {
  if (queries.empty()) throw Error(ErrorCode::kEmptyQuerySet, "no queries to pool");
  std::vector<EmbeddingVector> vs;
  for (const auto& q : queries) vs.push_back(embedder.Embed(q.code));
  return PoolEmbeddings(vs, mode);
}

EmbeddingVector Tile(const EmbeddingVector& v, std::size_t k) {
  EmbeddingVector out;
  out.encoder_id = v.encoder_id;
  for (std::size_t i = 0; i < k; ++i) out.values.insert(out.values.end(), v.values.begin(), v.values.end());
  Normalize(out.values);
  return out;
}

}  // namespace iclforge::retrieval
