#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iclforge/corpus.hpp"
#include "iclforge/modelgw/gateway.hpp"

namespace iclforge::retrieval {

using modelgw::EmbeddingVector;

// Dot product of the unit-normalized vectors. Throws kEncoderMismatch,
// kDimensionMismatch, and kInvalidArgument for zero vectors.
double CosineSimilarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Keyed by (encoder id, content hash); safe for concurrent use, last writer
// wins on identical keys.
class EmbeddingCache {
 public:
  std::optional<EmbeddingVector> Get(const std::string& encoder, std::string_view text) const;
  void Put(const std::string& encoder, std::string_view text, EmbeddingVector v);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, EmbeddingVector> entries_;
};

// Gateway embedding with an optional cache in front of it.
class Embedder {
 public:
  explicit Embedder(modelgw::Gateway& gw, EmbeddingCache* cache = nullptr)
      : gw_(gw), cache_(cache) {}
  EmbeddingVector Embed(std::string_view text);

 private:
  modelgw::Gateway& gw_;
  EmbeddingCache* cache_;
};

struct ScoredDemo {
  corpus::Demonstration demo;
  double similarity = 0.0;
};

struct SelectionResult {
  std::vector<ScoredDemo> demonstrations;  // similarity desc, id asc on ties
  std::size_t n = 0;
};

// Sorts by similarity descending, ties by id ascending.
void SortSelection(std::vector<ScoredDemo>& demos);

// Throws kEmptyRepository, kInvalidArgument for n = 0.
SelectionResult SelectTopN(const corpus::Query& query, const corpus::Repository& repo,
                           std::size_t n, Embedder& embedder);

enum class PoolMode { kMean, kConcat };

// kMean: element-wise mean re-normalized. kConcat: concatenation
// re-normalized; candidates must then be tiled to the same dimension.
// Throws kEmptyQuerySet, kEncoderMismatch, kDimensionMismatch.
EmbeddingVector PoolEmbeddings(const std::vector<EmbeddingVector>& vs, PoolMode mode = PoolMode::kMean);

EmbeddingVector PooledQueryEmbedding(const std::vector<corpus::Query>& queries, Embedder& embedder,
                                     PoolMode mode = PoolMode::kMean);

// `v` repeated k times and re-normalized: the candidate side of kConcat.
EmbeddingVector Tile(const EmbeddingVector& v, std::size_t k);

// Selection against a precomputed (possibly pooled) query vector. `tile` is
// the number of pooled queries under kConcat, 1 otherwise.
SelectionResult SelectTopNByVector(const EmbeddingVector& query, const corpus::Repository& repo,
                                   std::size_t n, Embedder& embedder, std::size_t tile = 1);

}  // namespace iclforge::retrieval
