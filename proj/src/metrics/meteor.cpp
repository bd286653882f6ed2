#include "iclforge/metrics/meteor.hpp"

#include <cmath>
#include <tuple>

#include "iclforge/error.hpp"
#include "iclforge/metrics/porter_stemmer.hpp"
#include "iclforge/metrics/tokenize.hpp"

namespace iclforge::metrics {

namespace {

constexpr std::size_t kNodeBudget = 200000;

enum class MatchKind { kNone, kExact, kStem };

std::size_t CountChunks(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::size_t chunks = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k == 0 || pairs[k].first != pairs[k - 1].first + 1 ||
        pairs[k].second != pairs[k - 1].second + 1) {
      ++chunks;
    }
  }
  return chunks;
}

class Aligner {
 public:
  Aligner(const std::vector<std::string>& cand, const std::vector<std::string>& ref)
      : kinds_(cand.size(), std::vector<MatchKind>(ref.size(), MatchKind::kNone)),
        used_(ref.size(), false) {
    std::vector<std::string> cs, rs;
    for (const auto& t : cand) cs.push_back(PorterStem(t));
    for (const auto& t : ref) rs.push_back(PorterStem(t));
    exact_left_.assign(cand.size() + 1, 0);
    any_left_.assign(cand.size() + 1, 0);
    for (std::size_t i = cand.size(); i-- > 0;) {
      bool exact = false;
      bool any = false;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (cand[i] == ref[j]) {
          kinds_[i][j] = MatchKind::kExact;
        } else if (cs[i] == rs[j]) {
          kinds_[i][j] = MatchKind::kStem;
        }
        exact = exact || kinds_[i][j] == MatchKind::kExact;
        any = any || kinds_[i][j] != MatchKind::kNone;
      }
      exact_left_[i] = exact_left_[i + 1] + (exact ? 1 : 0);
      any_left_[i] = any_left_[i + 1] + (any ? 1 : 0);
    }
  }

  MeteorAlignment Run() {
    best_ = Greedy();
    Search(0);
    return best_;
  }

 private:
  // Lexicographic objective: exact desc, total desc, chunks asc.
  static bool Better(std::size_t exact, std::size_t total, std::size_t chunks,
                     const MeteorAlignment& b) {
    return std::make_tuple(exact, total, b.chunks) >
           std::make_tuple(b.exact_matches, b.pairs.size(), chunks);
  }

  MeteorAlignment Greedy() const {
    MeteorAlignment a;
    std::vector<bool> used(used_.size(), false);
    std::vector<std::ptrdiff_t> link(kinds_.size(), -1);
    for (MatchKind stage : {MatchKind::kExact, MatchKind::kStem}) {
      std::ptrdiff_t prev = -1;
      for (std::size_t i = 0; i < kinds_.size(); ++i) {
        if (link[i] >= 0) {
          prev = link[i];
          continue;
        }
        std::ptrdiff_t pick = -1;
        for (std::size_t j = 0; j < used.size(); ++j) {
          if (used[j] || kinds_[i][j] != stage) continue;
          auto sj = static_cast<std::ptrdiff_t>(j);
          if (pick < 0 || sj == prev + 1) pick = sj;
          if (sj == prev + 1) break;
        }
        if (pick >= 0) {
          used[static_cast<std::size_t>(pick)] = true;
          link[i] = pick;
          prev = pick;
          if (stage == MatchKind::kExact) ++a.exact_matches;
        }
      }
    }
    for (std::size_t i = 0; i < link.size(); ++i) {
      if (link[i] >= 0) a.pairs.emplace_back(i, static_cast<std::size_t>(link[i]));
    }
    a.chunks = CountChunks(a.pairs);
    return a;
  }

  void Search(std::size_t i) {
    if (++nodes_ > kNodeBudget) return;
    std::size_t total = current_.size();
    if (i == kinds_.size()) {
      if (Better(exact_, total, chunks_, best_)) {
        best_.pairs = current_;
        best_.exact_matches = exact_;
        best_.chunks = chunks_;
      }
      return;
    }
    std::size_t exact_max = exact_ + exact_left_[i];
    std::size_t total_max = total + any_left_[i];
    if (exact_max < best_.exact_matches) return;
    if (exact_max == best_.exact_matches) {
      if (total_max < best_.pairs.size()) return;
      // Chunks never decrease as the alignment grows.
      if (total_max == best_.pairs.size() && chunks_ >= best_.chunks) return;
    }
    for (MatchKind stage : {MatchKind::kExact, MatchKind::kStem}) {
      for (std::size_t j = 0; j < used_.size(); ++j) {
        if (used_[j] || kinds_[i][j] != stage) continue;
        bool extends = !current_.empty() && current_.back().first + 1 == i &&
                       current_.back().second + 1 == j;
        used_[j] = true;
        current_.emplace_back(i, j);
        if (stage == MatchKind::kExact) ++exact_;
        if (!extends) ++chunks_;
        Search(i + 1);
        if (!extends) --chunks_;
        if (stage == MatchKind::kExact) --exact_;
        current_.pop_back();
        used_[j] = false;
      }
    }
    Search(i + 1);
  }

  std::vector<std::vector<MatchKind>> kinds_;
  std::vector<bool> used_;
  std::vector<std::size_t> exact_left_;
  std::vector<std::size_t> any_left_;
  std::vector<std::pair<std::size_t, std::size_t>> current_;
  std::size_t exact_ = 0;
  std::size_t chunks_ = 0;
  std::size_t nodes_ = 0;
  MeteorAlignment best_;
};

}  // namespace

MeteorAlignment AlignMeteor(const std::vector<std::string>& candidate,
                            const std::vector<std::string>& reference) {
  return Aligner(candidate, reference).Run();
}

double MeteorFromAlignment(const MeteorAlignment& a, std::size_t candidate_length,
                           std::size_t reference_length) {
  double m = static_cast<double>(a.pairs.size());
  if (m == 0.0) return 0.0;
  double p = m / static_cast<double>(candidate_length);
  double r = m / static_cast<double>(reference_length);
  double fmean = 10.0 * p * r / (r + 9.0 * p);
  double frag = static_cast<double>(a.chunks) / m;
  if (a.chunks == 1 && a.pairs.size() == candidate_length &&
      a.pairs.size() == reference_length) {
    frag = 0.0;
  }
  return fmean * (1.0 - 0.5 * std::pow(frag, 3.0));
}

double Meteor(std::string_view candidate, std::string_view reference) {
  auto c = Tokenize(candidate);
  auto r = Tokenize(reference);
  if (c.empty() || r.empty()) {
    throw Error(ErrorCode::kEmptyInput, "METEOR needs tokens on both sides");
  }
  return MeteorFromAlignment(AlignMeteor(c, r), c.size(), r.size());
}

}  // namespace iclforge::metrics
