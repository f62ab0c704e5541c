#pragma once

// User-based top-K collaborative filtering over document citation vectors.
//
// Each training document is a sparse vector over the citation vocabulary.
// For a partial citation list the K most cosine-similar training documents
// are found and every citation c is scored by
//
//   score(c) = sum_{d in top K} sim(q, d) * v_{d,c} / sum_{d in top K} sim(q, d)
//
// Candidates never cited by a positively similar neighbor are omitted; their
// score would be 0.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/corpus.hpp"
#include "citerec/error.hpp"
#include "citerec/ranked_list.hpp"
#include "citerec/sparse.hpp"
#include "json.hpp"

namespace citerec {

enum class Scheme { Binary, Tf, TfIdf };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Binary: return "binary";
    case Scheme::Tf: return "tf";
    case Scheme::TfIdf: break;
  }
  return "tfidf";
}

inline Scheme scheme_from_string(std::string_view s) {
  if (s == "binary") return Scheme::Binary;
  if (s == "tf") return Scheme::Tf;
  if (s == "tfidf") return Scheme::TfIdf;
  throw InvalidArgument("unknown scheme '" + std::string(s) + "' (binary|tf|tfidf)");
}

// Binary: 1 per distinct citation. Tf: occurrence count. TfIdf: count * idf.
inline SparseVector doc_vector(std::span<const Index> citations, std::size_t dims, Scheme scheme,
                               std::span<const double> idf = {}) {
  if (scheme == Scheme::TfIdf && idf.size() != dims) {
    throw InvalidArgument("tfidf scheme needs one idf weight per dimension");
  }
  std::vector<SparseVector::Entry> pairs;
  pairs.reserve(citations.size());
  for (Index c : citations) pairs.emplace_back(c, 1.0);
  auto v = SparseVector::from_pairs(dims, std::move(pairs));
  std::vector<SparseVector::Entry> weighted(v.entries().begin(), v.entries().end());
  for (auto& [c, w] : weighted) {
    if (scheme == Scheme::Binary) w = 1.0;
    if (scheme == Scheme::TfIdf) w *= idf[c];
  }
  return SparseVector::from_pairs(dims, std::move(weighted));
}

class CfModel {
 public:
  static constexpr std::string_view kMagic = "citerec-cf";
  static constexpr int kVersion = 1;

  // Document vectors of the training documents. The UNK citation is left
  // out of every vector: it is a bucket of unrelated authorities.
  static CfModel build(const std::vector<Document>& train, const CitationVocabulary& vocab,
                       Scheme scheme = Scheme::Binary, std::size_t k = 50) {
    if (k == 0) throw InvalidArgument("K must be positive");
    CfModel m;
    m.scheme_ = scheme;
    m.k_ = k;
    m.dims_ = vocab.size();
    m.unk_ = vocab.unk_index();

    std::vector<const Document*> sorted;
    for (const auto& d : train) sorted.push_back(&d);
    std::ranges::sort(sorted, {}, &Document::id);

    std::vector<std::vector<Index>> cites;
    for (const auto* d : sorted) {
      auto seq = citation_sequence(*d);
      std::erase(seq, m.unk_);
      cites.push_back(std::move(seq));
    }
    m.idf_.assign(m.dims_, 0.0);
    if (scheme == Scheme::TfIdf) {
      std::vector<std::size_t> df(m.dims_, 0);
      for (const auto& seq : cites) {
        const auto present = doc_vector(seq, m.dims_, Scheme::Binary);
        for (const auto& [c, w] : present.entries()) ++df[c];
      }
      const double n = static_cast<double>(sorted.size());
      for (std::size_t c = 0; c < m.dims_; ++c) {
        if (df[c] > 0) m.idf_[c] = std::log(n / static_cast<double>(df[c]));
      }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      m.ids_.push_back(sorted[i]->id);
      m.vectors_.push_back(doc_vector(cites[i], m.dims_, scheme, m.idf_));
    }
    m.index();
    return m;
  }

  Scheme scheme() const noexcept { return scheme_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t dims() const noexcept { return dims_; }
  Index unk_index() const noexcept { return unk_; }
  const std::vector<std::string>& doc_ids() const noexcept { return ids_; }
  const std::vector<SparseVector>& doc_vectors() const noexcept { return vectors_; }
  std::span<const double> idf() const noexcept { return idf_; }

  SparseVector query_vector(std::span<const Index> partial) const {
    std::vector<Index> q;
    for (Index c : partial) {
      if (c >= dims_) throw InvalidArgument("citation index out of range");
      if (c != unk_) q.push_back(c);
    }
    return doc_vector(q, dims_, scheme_, idf_);
  }

  // Top-n citations for a partial citation list. exclude_doc removes one
  // training document from the neighbor pool (leave-one-out use).
  RankedList recommend(std::span<const Index> partial, std::size_t top_n,
                       std::string_view exclude_doc = {}) const {
    const SparseVector q = query_vector(partial);
    if (q.empty() || top_n == 0) return {};

    std::vector<double> dot(ids_.size(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& [c, qw] : q.entries()) {
      for (const auto& [d, w] : postings_[c]) {
        if (dot[d] == 0.0) touched.push_back(d);
        dot[d] += qw * w;
      }
    }
    const double qn2 = q.squared_norm();
    struct Neighbor {
      std::uint32_t doc;
      double sim;
    };
    std::vector<Neighbor> neighbors;
    neighbors.reserve(touched.size());
    for (auto d : touched) {
      if (!exclude_doc.empty() && ids_[d] == exclude_doc) continue;
      const double sim = dot[d] / std::sqrt(qn2 * sq_norms_[d]);
      if (sim > 0.0) neighbors.push_back({d, sim});
    }
    auto closer = [](const Neighbor& a, const Neighbor& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.doc < b.doc;
    };
    if (neighbors.size() > k_) {
      std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k_),
                        neighbors.end(), closer);
      neighbors.resize(k_);
    } else {
      std::ranges::sort(neighbors, closer);
    }

    double denom = 0.0;
    for (const auto& n : neighbors) denom += n.sim;
    if (denom == 0.0) return {};

    std::vector<double> numer(dims_, 0.0);
    std::vector<Index> cands;
    for (const auto& n : neighbors) {
      for (const auto& [c, w] : vectors_[n.doc].entries()) {
        if (numer[c] == 0.0) cands.push_back(c);
        numer[c] += n.sim * w;
      }
    }
    std::unordered_set<Index> seen(partial.begin(), partial.end());
    std::vector<Ranked> scored;
    for (Index c : cands) {
      if (c == unk_ || seen.contains(c) || numer[c] <= 0.0) continue;
      scored.push_back({c, numer[c] / denom});
    }
    return RankedList::from_scores(std::move(scored), top_n);
  }

  // JSON artifact: {"magic", "version", "scheme", "k", "dims", "unk_index",
  // "idf": [...], "docs": [{"id", "v": [[index, weight], ...]}]}.
  void save(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["magic"] = kMagic;
    j["version"] = kVersion;
    j["scheme"] = to_string(scheme_);
    j["k"] = k_;
    j["dims"] = dims_;
    j["unk_index"] = unk_;
    j["idf"] = idf_;
    auto& docs = j["docs"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      nlohmann::ordered_json d;
      d["id"] = ids_[i];
      auto& v = d["v"] = nlohmann::ordered_json::array();
      for (const auto& [c, w] : vectors_[i].entries()) v.push_back({c, w});
      docs.push_back(std::move(d));
    }
    out << j.dump() << '\n';
  }

  static CfModel load(std::istream& in) {
    CfModel m;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.at("magic") != kMagic || j.at("version") != kVersion) {
        throw FormatError("cf model: bad magic or unsupported version");
      }
      m.scheme_ = scheme_from_string(j.at("scheme").get<std::string>());
      m.k_ = j.at("k").get<std::size_t>();
      m.dims_ = j.at("dims").get<std::size_t>();
      m.unk_ = j.at("unk_index").get<Index>();
      m.idf_ = j.at("idf").get<std::vector<double>>();
      if (m.idf_.size() != m.dims_ || m.k_ == 0) throw FormatError("cf model: inconsistent header");
      for (const auto& d : j.at("docs")) {
        m.ids_.push_back(d.at("id").get<std::string>());
        std::vector<SparseVector::Entry> pairs;
        for (const auto& e : d.at("v")) pairs.emplace_back(e.at(0).get<Index>(), e.at(1).get<double>());
        m.vectors_.push_back(SparseVector::from_pairs(m.dims_, std::move(pairs)));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("cf model: ") + e.what());
    }
    m.index();
    return m;
  }

 private:
  void index() {
    postings_.assign(dims_, {});
    sq_norms_.clear();
    for (std::uint32_t d = 0; d < vectors_.size(); ++d) {
      sq_norms_.push_back(vectors_[d].squared_norm());
      for (const auto& [c, w] : vectors_[d].entries()) postings_[c].emplace_back(d, w);
    }
  }

  Scheme scheme_ = Scheme::Binary;
  std::size_t k_ = 50;
  std::size_t dims_ = 0;
  Index unk_ = 0;
  std::vector<double> idf_;
  std::vector<std::string> ids_;
  std::vector<SparseVector> vectors_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
  std::vector<double> sq_norms_;
};

}  // namespace citerec
