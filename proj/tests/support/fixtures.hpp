#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "iclforge/language.hpp"
#include "iclforge/modelgw/backend.hpp"

namespace fixtures {

struct Snippet {
  std::string code;
  iclforge::Language lang;
};

// Template-generated C, Python and Java functions, each with at least one
// eligible local variable. `per_language` snippets per language.
std::vector<Snippet> MutationCorpus(std::size_t per_language, std::uint64_t seed);

// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void WriteFile(const std::string& path, const std::string& content);
std::string ReadFile(const std::string& path);

// Forwards to another backend and counts every call independently of the
// gateway's own counters.
class CountingBackend : public iclforge::modelgw::Backend {
 public:
  explicit CountingBackend(std::shared_ptr<iclforge::modelgw::Backend> inner)
      : inner_(std::move(inner)) {}

  std::string Id() const override { return inner_->Id(); }
  std::string EncoderId() const override { return inner_->EncoderId(); }
  std::string Complete(const iclforge::modelgw::Transcript& t,
                       const iclforge::modelgw::CompletionParams& p) override {
    ++complete;
    return inner_->Complete(t, p);
  }
  std::map<std::string, double> Classify(const iclforge::modelgw::Transcript& t,
                                         const std::vector<std::string>& labels) override {
    ++classify;
    return inner_->Classify(t, labels);
  }
  std::vector<iclforge::modelgw::RawProposal> Infill(std::string_view prefix,
                                                     std::string_view suffix,
                                                     std::size_t n) override {
    return inner_->Infill(prefix, suffix, n);
  }
  std::vector<double> Embed(std::string_view text) override { return inner_->Embed(text); }
  std::vector<iclforge::modelgw::TokenLogProb> LogProbs(std::string_view text) override {
    return inner_->LogProbs(text);
  }

  std::atomic<std::uint64_t> complete{0};
  std::atomic<std::uint64_t> classify{0};

 private:
  std::shared_ptr<iclforge::modelgw::Backend> inner_;
};

// Runs the built CLI binary with `args`, returns its exit status.
int RunCli(const std::string& cli, const std::vector<std::string>& args);

}  // namespace fixtures
