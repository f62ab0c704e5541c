#pragma once

#include <algorithm>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include "citerec/sparse.hpp"

namespace citerec {

struct Ranked {
  Index citation = 0;
  double score = 0.0;

  friend bool operator==(const Ranked&, const Ranked&) = default;
};

// The universal recommender output: scores non-increasing, ties by ascending
// citation index, no duplicate indices.
class RankedList {
 public:
  RankedList() = default;

  // Ranks the candidates and keeps the first top_n. Candidates must not
  // contain duplicate indices.
  static RankedList from_scores(std::vector<Ranked> candidates, std::size_t top_n) {
    auto before = [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.citation < b.citation;
    };
    if (candidates.size() > top_n) {
      std::partial_sort(candidates.begin(),
                        candidates.begin() + static_cast<std::ptrdiff_t>(top_n),
                        candidates.end(), before);
      candidates.resize(top_n);
    } else {
      std::sort(candidates.begin(), candidates.end(), before);
    }
    RankedList out;
    out.items_ = std::move(candidates);
    return out;
  }

  const std::vector<Ranked>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const Ranked& operator[](std::size_t i) const { return items_[i]; }

  // 0-based rank of the citation, or size() when absent.
  std::size_t position_of(Index citation) const noexcept {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].citation == citation) return i;
    }
    return items_.size();
  }

  friend bool operator==(const RankedList&, const RankedList&) = default;

 private:
  std::vector<Ranked> items_;
};

}  // namespace citerec
