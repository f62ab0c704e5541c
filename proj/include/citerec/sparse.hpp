#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "citerec/error.hpp"

namespace citerec {

using Index = std::uint32_t;

// Sparse real vector over a fixed number of dimensions.
// Invariant: indices strictly increasing, all < dims, no zero weights.
class SparseVector {
 public:
  using Entry = std::pair<Index, double>;

  SparseVector() = default;
  explicit SparseVector(std::size_t dims) : dims_(dims) {}

  // Builds from (index, weight) pairs in any order; duplicate indices are
  // summed and zeros dropped.
  static SparseVector from_pairs(std::size_t dims, std::vector<Entry> pairs) {
    std::sort(pairs.begin(), pairs.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    SparseVector v(dims);
    for (const auto& [i, w] : pairs) {
      if (i >= dims) {
        throw InvalidArgument("sparse index " + std::to_string(i) +
                              " out of range for dims " + std::to_string(dims));
      }
      if (!v.entries_.empty() && v.entries_.back().first == i) {
        v.entries_.back().second += w;
      } else {
        v.entries_.emplace_back(i, w);
      }
    }
    std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
    return v;
  }

  std::size_t dims() const noexcept { return dims_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  double get(Index i) const noexcept {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), i,
        [](const Entry& e, Index key) { return e.first < key; });
    return (it != entries_.end() && it->first == i) ? it->second : 0.0;
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.second * e.second;
    return s;
  }

  double norm() const noexcept { return std::sqrt(squared_norm()); }

  // Scales to unit L2 norm; the zero vector stays zero.
  void normalize() noexcept {
    const double n = norm();
    if (n == 0.0) return;
    for (auto& e : entries_) e.second /= n;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dims_ = 0;
  std::vector<Entry> entries_;
};

inline double dot(const SparseVector& u, const SparseVector& v) {
  if (u.dims() != v.dims()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.dims()) +
                          " vs " + std::to_string(v.dims()));
  }
  const auto a = u.entries();
  const auto b = v.entries();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(const SparseVector& u, const SparseVector& v) {
  const double d = dot(u, v);
  const double su = u.squared_norm();
  const double sv = v.squared_norm();
  if (su == 0.0 || sv == 0.0) return 0.0;
  return d / std::sqrt(su * sv);
}

}  // namespace citerec
