#pragma once

// Context/forecast window instances.
//
// An offset o splits a document's token stream into a context (up to l
// tokens ending at o-1) and a forecast window [o, o+w). The prediction target
// is the first citation token in the forecast window. Offsets whose forecast
// window has no citation, or whose first citation is UNK, are not valid.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/error.hpp"
#include "citerec/hash.hpp"
#include "json.hpp"

namespace citerec {

struct WindowSpec {
  std::size_t context_len = 256;
  std::size_t forecast_len = 128;

  void validate() const {
    if (context_len < 1 || forecast_len < 1) {
      throw InvalidArgument("window spec: context and forecast lengths must be >= 1");
    }
  }
};

struct WindowInstance {
  std::string doc_id;
  std::size_t offset = 0;
  std::vector<Token> context;
  Index target = 0;
  std::size_t distance = 0;  // 1-based position of the target in the forecast window
  Metadata metadata;
};

namespace detail {
// first_cite[i] = position of the first citation token at or after i, or
// tokens.size() if none.
inline std::vector<std::size_t> next_citation(std::span<const Token> tokens) {
  std::vector<std::size_t> next(tokens.size() + 1, tokens.size());
  for (std::size_t i = tokens.size(); i-- > 0;) {
    next[i] = tokens[i].is_cite() ? i : next[i + 1];
  }
  return next;
}
}  // namespace detail

inline std::vector<std::size_t> valid_offsets(const Document& doc, const WindowSpec& spec,
                                              Index unk_index) {
  spec.validate();
  std::vector<std::size_t> out;
  const std::size_t n = doc.tokens.size();
  const auto next = detail::next_citation(doc.tokens);
  for (std::size_t o = 1; o < n; ++o) {
    const std::size_t c = next[o];
    if (c < n && c - o < spec.forecast_len && doc.tokens[c].citation() != unk_index) {
      out.push_back(o);
    }
  }
  return out;
}

// Instance at a given valid offset; nullopt when the offset is not valid.
inline std::optional<WindowInstance> instance_at(const Document& doc, const WindowSpec& spec,
                                                 Index unk_index, std::size_t offset) {
  const std::size_t n = doc.tokens.size();
  if (offset < 1 || offset >= n) return std::nullopt;
  std::size_t c = offset;
  while (c < n && c - offset < spec.forecast_len && !doc.tokens[c].is_cite()) ++c;
  if (c >= n || c - offset >= spec.forecast_len || doc.tokens[c].citation() == unk_index) {
    return std::nullopt;
  }
  WindowInstance inst;
  inst.doc_id = doc.id;
  inst.offset = offset;
  const std::size_t begin = offset > spec.context_len ? offset - spec.context_len : 0;
  inst.context.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                      doc.tokens.begin() + static_cast<std::ptrdiff_t>(offset));
  inst.target = doc.tokens[c].citation();
  inst.distance = c - offset + 1;
  inst.metadata = doc.metadata;
  return inst;
}

// RNG stream of one (seed, document, epoch) triple, independent of the
// order in which documents are visited.
inline Rng instance_rng(std::uint64_t seed, std::string_view doc_id, std::uint64_t epoch) {
  return Rng(mix_seed(mix_seed(seed, doc_id), epoch));
}

// Uniform draw over the valid offsets; nullopt when there are none.
inline std::optional<WindowInstance> sample_instance(const Document& doc, const WindowSpec& spec,
                                                     Index unk_index, Rng& rng) {
  const auto offsets = valid_offsets(doc, spec, unk_index);
  if (offsets.empty()) return std::nullopt;
  return instance_at(doc, spec, unk_index, offsets[rng.below(offsets.size())]);
}

inline nlohmann::ordered_json to_json(const WindowInstance& inst) {
  nlohmann::ordered_json j;
  j["doc_id"] = inst.doc_id;
  j["offset"] = inst.offset;
  auto& ctx = j["context"] = nlohmann::ordered_json::array();
  for (const auto& t : inst.context) {
    if (t.is_cite()) {
      ctx.push_back({"c", t.citation()});
    } else {
      ctx.push_back({"w", t.term()});
    }
  }
  j["target"] = inst.target;
  j["distance"] = inst.distance;
  j["year"] = inst.metadata.year;
  j["issue_area"] = inst.metadata.issue_area;
  j["vlj"] = inst.metadata.vlj;
  return j;
}

class ExportError : public Error {
 public:
  ExportError(const std::string& what, std::size_t written) : Error(what), written_(written) {}
  std::size_t written() const noexcept { return written_; }

 private:
  std::size_t written_;
};

// One sampled instance per document per epoch as JSONL, epochs in order
// and documents by ascending id within an epoch. Citation-free documents are
// skipped. Returns the number of lines written.
inline std::size_t export_instances(const std::vector<Document>& docs, const WindowSpec& spec,
                                    Index unk_index, std::size_t epochs, std::uint64_t seed,
                                    std::ostream& sink) {
  spec.validate();
  std::vector<const Document*> sorted;
  for (const auto& d : docs) sorted.push_back(&d);
  std::ranges::sort(sorted, {}, &Document::id);
  std::size_t written = 0;
  for (std::size_t e = 0; e < epochs; ++e) {
    for (const auto* d : sorted) {
      auto rng = instance_rng(seed, d->id, e);
      const auto inst = sample_instance(*d, spec, unk_index, rng);
      if (!inst) continue;
      sink << to_json(*inst).dump() << '\n';
      if (!sink) throw ExportError("window export: write failed", written);
      ++written;
    }
  }
  sink.flush();
  if (!sink) throw ExportError("window export: write failed", written);
  return written;
}

}  // namespace citerec
