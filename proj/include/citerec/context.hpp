#pragma once

// Context-aware recommendation from tf-idf context banks.
//
// Every training occurrence of a citation contributes the L2-normalized
// tf-idf vector of the tokens preceding it. A citation c with stored
// contexts b_1..b_k is scored against a query context q by
//
//   score(q, c) = (1/k) * sum_j (q . b_j)^2
//
// which lies in [0, 1] for unit vectors.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/corpus.hpp"
#include "citerec/error.hpp"
#include "citerec/hash.hpp"
#include "citerec/ranked_list.hpp"
#include "citerec/sparse.hpp"
#include "json.hpp"

namespace citerec {

struct TextVocabOptions {
  std::size_t max_terms = 25000;
  std::size_t min_df = 10;
};

// Word terms occupy [0, word_count()); citation index c maps to the
// pseudo-term word_count() + c.
class TextVocabulary {
 public:
  static constexpr std::string_view kCitePrefix = "#cite:";

  TextVocabulary() = default;

  std::size_t word_count() const noexcept { return words_.size(); }
  std::size_t citation_count() const noexcept { return cite_df_.size(); }
  std::size_t dims() const noexcept { return words_.size() + cite_df_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::optional<Index> word_term(std::string_view w) const {
    const auto it = word_index_.find(std::string(w));
    if (it == word_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Index> cite_term(Index c) const {
    if (c >= cite_df_.size()) return std::nullopt;
    return static_cast<Index>(words_.size() + c);
  }
  std::optional<Index> term_of(const Token& t) const {
    return t.is_cite() ? cite_term(t.citation()) : word_term(t.term());
  }

  double idf(Index term) const {
    return term < words_.size() ? word_idf_.at(term) : cite_idf_.at(term - words_.size());
  }
  std::uint64_t df(Index term) const {
    return term < words_.size() ? word_df_.at(term) : cite_df_.at(term - words_.size());
  }

  // Filters stopwords, digit-bearing words and words in fewer than min_df
  // documents; keeps the max_terms most frequent (ties lexicographic); then
  // appends one pseudo-term per citation index. idf(t) = ln(N / df(t)),
  // 0 for a citation never seen in training.
  static TextVocabulary build(const std::vector<Document>& train, std::size_t n_citations,
                              const std::set<std::string>& stopwords,
                              TextVocabOptions opts = {}) {
    TextVocabulary tv;
    if (train.empty()) return tv;
    std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> freq;  // (cf, df)
    std::vector<std::uint64_t> cite_df(n_citations, 0);
    for (const auto& doc : train) {
      std::set<std::string_view> words_in_doc;
      std::set<Index> cites_in_doc;
      for (const auto& t : doc.tokens) {
        if (t.is_cite()) {
          cites_in_doc.insert(t.citation());
        } else {
          ++freq[t.term()].first;
          words_in_doc.insert(t.term());
        }
      }
      for (auto w : words_in_doc) ++freq[std::string(w)].second;
      for (Index c : cites_in_doc) {
        if (c < n_citations) ++cite_df[c];
      }
    }
    std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> kept;
    for (auto& [w, cf_df] : freq) {
      if (cf_df.second < opts.min_df || stopwords.contains(w)) continue;
      if (std::ranges::any_of(w, [](char c) { return c >= '0' && c <= '9'; })) continue;
      kept.emplace_back(w, cf_df);
    }
    std::ranges::sort(kept, [](const auto& a, const auto& b) {
      if (a.second.first != b.second.first) return a.second.first > b.second.first;
      return a.first < b.first;
    });
    if (kept.size() > opts.max_terms) kept.resize(opts.max_terms);

    const double n = static_cast<double>(train.size());
    for (auto& [w, cf_df] : kept) {
      tv.word_index_.emplace(w, static_cast<Index>(tv.words_.size()));
      tv.words_.push_back(w);
      tv.word_df_.push_back(cf_df.second);
      tv.word_idf_.push_back(std::log(n / static_cast<double>(cf_df.second)));
    }
    tv.cite_df_ = std::move(cite_df);
    for (auto df : tv.cite_df_) {
      tv.cite_idf_.push_back(df > 0 ? std::log(n / static_cast<double>(df)) : 0.0);
    }
    return tv;
  }

  // TSV "term\tdf\tidf"; citation pseudo-terms are written "#cite:<index>".
  void write_tsv(std::ostream& out) const {
    out << "term\tdf\tidf\n";
    char buf[64];
    auto row = [&](const std::string& term, std::uint64_t df, double idf) {
      std::snprintf(buf, sizeof buf, "%.17g", idf);
      out << term << '\t' << df << '\t' << buf << '\n';
    };
    for (std::size_t i = 0; i < words_.size(); ++i) row(words_[i], word_df_[i], word_idf_[i]);
    for (std::size_t c = 0; c < cite_df_.size(); ++c) {
      row(std::string(kCitePrefix) + std::to_string(c), cite_df_[c], cite_idf_[c]);
    }
  }

  static TextVocabulary read_tsv(std::istream& in) {
    TextVocabulary tv;
    std::string line;
    if (!std::getline(in, line) || line != "term\tdf\tidf") {
      throw FormatError("text vocabulary tsv: bad header");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto t1 = line.find('\t');
      const auto t2 = line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos) {
        throw FormatError("text vocabulary tsv: expected 3 fields: " + line);
      }
      const std::string term = line.substr(0, t1);
      const auto df = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
      const double idf = std::stod(line.substr(t2 + 1));
      if (term.starts_with(kCitePrefix)) {
        if (std::stoull(term.substr(kCitePrefix.size())) != tv.cite_df_.size()) {
          throw FormatError("text vocabulary tsv: citation terms out of order");
        }
        tv.cite_df_.push_back(df);
        tv.cite_idf_.push_back(idf);
      } else {
        if (!tv.cite_df_.empty()) throw FormatError("text vocabulary tsv: word after citations");
        tv.word_index_.emplace(term, static_cast<Index>(tv.words_.size()));
        tv.words_.push_back(term);
        tv.word_df_.push_back(df);
        tv.word_idf_.push_back(idf);
      }
    }
    return tv;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> word_df_;
  std::vector<double> word_idf_;
  std::vector<std::uint64_t> cite_df_;
  std::vector<double> cite_idf_;
  std::unordered_map<std::string, Index> word_index_;
};

// The up-to-len tokens immediately before position pos.
inline std::span<const Token> preceding_window(std::span<const Token> tokens, std::size_t pos,
                                               std::size_t len) {
  const std::size_t begin = pos > len ? pos - len : 0;
  return tokens.subspan(begin, pos - begin);
}

// L2-normalized tf-idf vector of the in-vocabulary terms of a window.
inline SparseVector context_vector(std::span<const Token> window, const TextVocabulary& tv) {
  std::vector<SparseVector::Entry> pairs;
  for (const auto& t : window) {
    if (const auto term = tv.term_of(t)) pairs.emplace_back(*term, 1.0);
  }
  auto counts = SparseVector::from_pairs(tv.dims(), std::move(pairs));
  std::vector<SparseVector::Entry> weighted;
  for (const auto& [term, tf] : counts.entries()) weighted.emplace_back(term, tf * tv.idf(term));
  auto v = SparseVector::from_pairs(tv.dims(), std::move(weighted));
  v.normalize();
  return v;
}

struct BankOptions {
  std::size_t context_len = 50;
  std::size_t cap = 100;
  std::uint64_t seed = 0;
};

class ContextBank {
 public:
  static constexpr std::string_view kMagic = "citerec-context-bank";
  static constexpr int kVersion = 1;
  static constexpr std::uint32_t kNoDoc = 0xffffffffu;

  struct Context {
    SparseVector vector;
    std::uint32_t doc = kNoDoc;  // position in doc_ids(), for leave-one-out scoring
  };

  ContextBank() = default;

  // Bank over pre-built vectors (no source documents), one list per
  // citation index.
  static ContextBank from_vectors(std::size_t dims, std::vector<std::vector<SparseVector>> per_citation,
                                  Index unk_index) {
    ContextBank b;
    b.dims_ = dims;
    b.unk_ = unk_index;
    for (auto& list : per_citation) {
      auto& dst = b.contexts_.emplace_back();
      for (auto& v : list) dst.push_back({std::move(v), kNoDoc});
    }
    return b;
  }

  // One context per training occurrence of every non-UNK citation; when a
  // citation has more than cap occurrences a uniform subset of cap is kept,
  // drawn from an RNG stream seeded by (seed, citation).
  static ContextBank build(const std::vector<Document>& train, const TextVocabulary& tv,
                           std::size_t n_citations, Index unk_index, BankOptions opts = {}) {
    ContextBank b;
    b.dims_ = tv.dims();
    b.unk_ = unk_index;
    b.opts_ = opts;
    b.contexts_.resize(n_citations);

    std::vector<const Document*> sorted;
    for (const auto& d : train) sorted.push_back(&d);
    std::ranges::sort(sorted, {}, &Document::id);
    for (const auto* d : sorted) b.doc_ids_.push_back(d->id);

    struct Occurrence {
      std::uint32_t doc;
      std::uint32_t pos;
    };
    std::vector<std::vector<Occurrence>> occ(n_citations);
    for (std::uint32_t di = 0; di < sorted.size(); ++di) {
      const auto& toks = sorted[di]->tokens;
      for (std::uint32_t p = 0; p < toks.size(); ++p) {
        if (!toks[p].is_cite()) continue;
        const Index c = toks[p].citation();
        if (c == unk_index || c >= n_citations) continue;
        occ[c].push_back({di, p});
      }
    }

    for (Index c = 0; c < n_citations; ++c) {
      auto& list = occ[c];
      if (list.size() > opts.cap) {
        Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(c)));
        std::vector<std::uint32_t> idx(list.size());
        for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < opts.cap; ++i) {
          const auto j = i + rng.below(idx.size() - i);
          std::swap(idx[i], idx[j]);
        }
        idx.resize(opts.cap);
        std::ranges::sort(idx);
        std::vector<Occurrence> chosen;
        for (auto i : idx) chosen.push_back(list[i]);
        list = std::move(chosen);
      }
      for (const auto& o : list) {
        const std::span<const Token> toks = sorted[o.doc]->tokens;
        b.contexts_[c].push_back({context_vector(preceding_window(toks, o.pos, opts.context_len), tv),
                                  o.doc});
      }
    }
    return b;
  }

  std::size_t dims() const noexcept { return dims_; }
  std::size_t citation_count() const noexcept { return contexts_.size(); }
  Index unk_index() const noexcept { return unk_; }
  const BankOptions& options() const noexcept { return opts_; }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<Context>& contexts(Index c) const { return contexts_.at(c); }
  std::size_t k(Index c) const { return c < contexts_.size() ? contexts_[c].size() : 0; }

  // Mean squared dot product of the query with the contexts of c; 0 for a
  // citation without contexts.
  double score(const SparseVector& query, Index c) const {
    if (query.dims() != dims_) throw InvalidArgument("query dimension mismatch");
    std::vector<double> dense(dims_, 0.0);
    for (const auto& [t, w] : query.entries()) dense[t] = w;
    return score_dense(dense, c, kNoDoc);
  }

  // Every citation with a positive score, ranked. exclude_doc drops the
  // contexts that came from that training document.
  RankedList recommend(const SparseVector& query, std::size_t top_n,
                       std::string_view exclude_doc = {}) const {
    if (query.empty() || top_n == 0) return {};
    if (query.dims() != dims_) throw InvalidArgument("query dimension mismatch");
    std::uint32_t excluded = kNoDoc;
    if (!exclude_doc.empty()) {
      const auto it = std::ranges::lower_bound(doc_ids_, exclude_doc);
      if (it != doc_ids_.end() && *it == exclude_doc) {
        excluded = static_cast<std::uint32_t>(it - doc_ids_.begin());
      }
    }
    std::vector<double> dense(dims_, 0.0);
    for (const auto& [t, w] : query.entries()) dense[t] = w;
    std::vector<Ranked> scored;
    for (Index c = 0; c < contexts_.size(); ++c) {
      if (c == unk_) continue;
      const double s = score_dense(dense, c, excluded);
      if (s > 0.0) scored.push_back({c, s});
    }
    return RankedList::from_scores(std::move(scored), top_n);
  }

  RankedList recommend(std::span<const Token> window, const TextVocabulary& tv, std::size_t top_n,
                       std::string_view exclude_doc = {}) const {
    return recommend(context_vector(window, tv), top_n, exclude_doc);
  }

  // JSON artifact: {"magic", "version", "dims", "unk_index", "context_len",
  // "cap", "seed", "doc_ids": [...], "contexts": [[{"doc", "v": [[t, w]...]}...]...]}
  void save(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["magic"] = kMagic;
    j["version"] = kVersion;
    j["dims"] = dims_;
    j["unk_index"] = unk_;
    j["context_len"] = opts_.context_len;
    j["cap"] = opts_.cap;
    j["seed"] = opts_.seed;
    j["doc_ids"] = doc_ids_;
    auto& all = j["contexts"] = nlohmann::ordered_json::array();
    for (const auto& list : contexts_) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& ctx : list) {
        nlohmann::ordered_json e;
        e["doc"] = ctx.doc;
        auto& v = e["v"] = nlohmann::ordered_json::array();
        for (const auto& [t, w] : ctx.vector.entries()) v.push_back({t, w});
        arr.push_back(std::move(e));
      }
      all.push_back(std::move(arr));
    }
    out << j.dump() << '\n';
  }

  static ContextBank load(std::istream& in) {
    ContextBank b;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.at("magic") != kMagic || j.at("version") != kVersion) {
        throw FormatError("context bank: bad magic or unsupported version");
      }
      b.dims_ = j.at("dims").get<std::size_t>();
      b.unk_ = j.at("unk_index").get<Index>();
      b.opts_.context_len = j.at("context_len").get<std::size_t>();
      b.opts_.cap = j.at("cap").get<std::size_t>();
      b.opts_.seed = j.at("seed").get<std::uint64_t>();
      b.doc_ids_ = j.at("doc_ids").get<std::vector<std::string>>();
      for (const auto& list : j.at("contexts")) {
        auto& dst = b.contexts_.emplace_back();
        for (const auto& e : list) {
          std::vector<SparseVector::Entry> pairs;
          for (const auto& p : e.at("v")) pairs.emplace_back(p.at(0).get<Index>(), p.at(1).get<double>());
          dst.push_back({SparseVector::from_pairs(b.dims_, std::move(pairs)),
                         e.at("doc").get<std::uint32_t>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("context bank: ") + e.what());
    }
    return b;
  }

 private:
  double score_dense(const std::vector<double>& q, Index c, std::uint32_t excluded) const {
    if (c >= contexts_.size()) return 0.0;
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& ctx : contexts_[c]) {
      if (excluded != kNoDoc && ctx.doc == excluded) continue;
      double d = 0.0;
      for (const auto& [t, w] : ctx.vector.entries()) d += w * q[t];
      sum += d * d;
      ++k;
    }
    return k == 0 ? 0.0 : sum / static_cast<double>(k);
  }

  std::size_t dims_ = 0;
  Index unk_ = 0;
  BankOptions opts_;
  std::vector<std::string> doc_ids_;
  std::vector<std::vector<Context>> contexts_;
};

// Query-independent baseline: the top_n most cited training citations,
// ties by ascending index, UNK excluded.
inline RankedList majority_recommend(std::span<const std::uint64_t> counts, Index unk_index,
                                     std::size_t top_n) {
  std::vector<Ranked> all;
  for (Index c = 0; c < counts.size(); ++c) {
    if (c != unk_index) all.push_back({c, static_cast<double>(counts[c])});
  }
  return RankedList::from_scores(std::move(all), top_n);
}

}  // namespace citerec
