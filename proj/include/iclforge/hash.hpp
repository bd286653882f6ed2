#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace iclforge {

// FNV-1a over bytes, seeded. Stable across platforms; used for content keys
// and every stub-backend decision.
std::uint64_t HashBytes(std::string_view bytes, std::uint64_t seed = 0);

std::uint64_t HashCombine(std::uint64_t a, std::uint64_t b);

// 16-char lowercase hex digest of HashBytes.
std::string ContentHash(std::string_view bytes);

// splitmix64 stream; deterministic pseudo-random doubles for the stub.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t Next();
  // Uniform in [0, 1).
  double NextUnit();
  // Uniform in [-1, 1).
  double NextSigned() { return 2.0 * NextUnit() - 1.0; }

 private:
  std::uint64_t state_;
};

}  // namespace iclforge
