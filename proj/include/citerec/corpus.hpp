#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/error.hpp"
#include "citerec/hash.hpp"
#include "json.hpp"

namespace citerec {

struct Metadata {
  int year = 0;
  int issue_area = 0;
  int vlj = 0;

  friend bool operator==(const Metadata&, const Metadata&) = default;
};

// A lowercased word or a citation vocabulary index.
class Token {
 public:
  static Token word(std::string term) { return Token(std::move(term)); }
  static Token cite(Index index) { return Token(index); }

  bool is_word() const noexcept { return std::holds_alternative<std::string>(v_); }
  bool is_cite() const noexcept { return std::holds_alternative<Index>(v_); }
  const std::string& term() const { return std::get<std::string>(v_); }
  Index citation() const { return std::get<Index>(v_); }

  friend bool operator==(const Token&, const Token&) = default;

 private:
  explicit Token(std::string term) : v_(std::move(term)) {}
  explicit Token(Index index) : v_(index) {}
  std::variant<std::string, Index> v_;
};

struct Document {
  std::string id;
  std::vector<Token> tokens;
  Metadata metadata;
};

// Citation token resolved to its canonical identity but not yet to a
// vocabulary index. Lets ingest run before the vocabulary exists.
struct PreToken {
  bool is_cite = false;
  std::string word;             // when !is_cite
  NormalizedCitation citation;  // when is_cite

  friend bool operator==(const PreToken&, const PreToken&) = default;
};

struct RawDocument {
  std::string id;
  std::string text;
  Metadata metadata;
};

struct NormalizedDocument {
  std::string id;
  std::vector<PreToken> tokens;
  Metadata metadata;
};

namespace detail {
inline bool is_word_byte(char c) { return is_alnum(c); }

inline bool joiner_at(std::string_view t, std::size_t p, std::size_t& width) {
  if (t[p] == '\'' || t[p] == '-') {
    width = 1;
    return true;
  }
  if (t.substr(p, 3) == "\xE2\x80\x99") {  // right single quote used as apostrophe
    width = 3;
    return true;
  }
  return false;
}
}  // namespace detail

// Lowercased ASCII alphanumeric runs. An apostrophe or hyphen between two
// word characters joins them ("veteran's", "service-connected"); everything
// else, including non-ASCII bytes, separates.
inline void append_words(std::string_view text, std::vector<std::string>& out) {
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (detail::is_word_byte(c)) {
      cur.push_back(detail::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c);
      ++i;
      continue;
    }
    std::size_t width = 0;
    if (!cur.empty() && detail::joiner_at(text, i, width) && i + width < text.size() &&
        detail::is_word_byte(text[i + width])) {
      cur.push_back(text[i] == '-' ? '-' : '\'');
      i += width;
      continue;
    }
    if (!cur.empty()) out.push_back(std::exchange(cur, {}));
    ++i;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
}

inline std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> out;
  append_words(text, out);
  return out;
}

// Extracts citations, word-tokenizes the text around them and puts the
// normalized citations back where each citation span stood.
inline std::vector<PreToken> pretokenize(std::string_view text, const AuthorityIndex& index) {
  std::vector<PreToken> out;
  std::vector<std::string> words;
  std::size_t cursor = 0;
  auto flush_words = [&](std::string_view segment) {
    words.clear();
    append_words(segment, words);
    for (auto& w : words) out.push_back({false, std::move(w), {}});
  };
  for (const auto& raw : extract_citations(text)) {
    flush_words(text.substr(cursor, raw.span.start - cursor));
    for (auto& c : normalize(raw, index)) out.push_back({true, {}, std::move(c)});
    cursor = raw.span.end;
  }
  flush_words(text.substr(cursor));
  return out;
}

inline std::vector<Token> index_tokens(const std::vector<PreToken>& pre,
                                       const CitationVocabulary& vocab) {
  std::vector<Token> out;
  out.reserve(pre.size());
  for (const auto& p : pre) {
    out.push_back(p.is_cite ? Token::cite(vocab.lookup(p.citation.key)) : Token::word(p.word));
  }
  return out;
}

inline std::vector<Token> tokenize(std::string_view text, const CitationVocabulary& vocab,
                                   const AuthorityIndex& index) {
  return index_tokens(pretokenize(text, index), vocab);
}

inline NormalizedDocument normalize_document(const RawDocument& doc, const AuthorityIndex& index) {
  return {doc.id, pretokenize(doc.text, index), doc.metadata};
}

inline Document index_document(const NormalizedDocument& doc, const CitationVocabulary& vocab) {
  return {doc.id, index_tokens(doc.tokens, vocab), doc.metadata};
}

// Citation indices of a document in order of appearance.
inline std::vector<Index> citation_sequence(const Document& doc) {
  std::vector<Index> out;
  for (const auto& t : doc.tokens) {
    if (t.is_cite()) out.push_back(t.citation());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL formats

namespace detail {
inline const nlohmann::json& require(const nlohmann::json& obj, const char* field,
                                     std::size_t line) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw FormatError("line " + std::to_string(line) + ": missing field '" + field + "'");
  }
  return obj.at(field);
}

inline int require_int(const nlohmann::json& obj, const char* field, std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_number_integer()) {
    throw FormatError("line " + std::to_string(line) + ": field '" + field +
                      "' must be an integer");
  }
  return v.get<int>();
}

inline std::string require_string(const nlohmann::json& obj, const char* field,
                                  std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_string()) {
    throw FormatError("line " + std::to_string(line) + ": field '" + field +
                      "' must be a string");
  }
  return v.get<std::string>();
}

inline nlohmann::json parse_line(const std::string& line, std::size_t n) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("line " + std::to_string(n) + ": " + e.what());
  }
}

inline Metadata read_metadata(const nlohmann::json& obj, std::size_t line) {
  return {require_int(obj, "year", line), require_int(obj, "issue_area", line),
          require_int(obj, "vlj", line)};
}

inline void write_metadata(nlohmann::ordered_json& obj, const Metadata& m) {
  obj["year"] = m.year;
  obj["issue_area"] = m.issue_area;
  obj["vlj"] = m.vlj;
}

template <typename F>
void for_each_jsonl(std::istream& in, F&& f) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    f(parse_line(line, n), n);
  }
}
}  // namespace detail

// Corpus input: {"id", "text", "year", "issue_area", "vlj"} per line. Every
// metadata field is required and ids must be unique.
inline std::vector<RawDocument> read_corpus_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::set<std::string> seen;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t n) {
    RawDocument d{detail::require_string(obj, "id", n), detail::require_string(obj, "text", n),
                  detail::read_metadata(obj, n)};
    if (!seen.insert(d.id).second) {
      throw FormatError("line " + std::to_string(n) + ": duplicate id '" + d.id + "'");
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

inline void write_corpus_jsonl(std::ostream& out, const std::vector<RawDocument>& docs) {
  for (const auto& d : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = d.id;
    obj["text"] = d.text;
    detail::write_metadata(obj, d.metadata);
    out << obj.dump() << '\n';
  }
}

// Normalized cache: tokens are ["w", term] or ["k", class, key].
inline void write_normalized_jsonl(std::ostream& out, const std::vector<NormalizedDocument>& docs) {
  for (const auto& d : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = d.id;
    detail::write_metadata(obj, d.metadata);
    auto& toks = obj["tokens"] = nlohmann::ordered_json::array();
    for (const auto& t : d.tokens) {
      if (t.is_cite) {
        toks.push_back({"k", to_string(t.citation.cls), t.citation.key});
      } else {
        toks.push_back({"w", t.word});
      }
    }
    out << obj.dump() << '\n';
  }
}

inline std::vector<NormalizedDocument> read_normalized_jsonl(std::istream& in) {
  std::vector<NormalizedDocument> docs;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t n) {
    NormalizedDocument d{detail::require_string(obj, "id", n), {}, detail::read_metadata(obj, n)};
    for (const auto& t : detail::require(obj, "tokens", n)) {
      if (t.size() == 2 && t[0] == "w") {
        d.tokens.push_back({false, t[1].get<std::string>(), {}});
      } else if (t.size() == 3 && t[0] == "k") {
        d.tokens.push_back(
            {true, {}, {citation_class_from_string(t[1].get<std::string>()), t[2].get<std::string>()}});
      } else {
        throw FormatError("line " + std::to_string(n) + ": bad token " + t.dump());
      }
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

// Tokenized cache: {"id", "tokens": [["w","the"],["c",7],...], plus metadata}.
inline void write_tokens_jsonl(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = d.id;
    auto& toks = obj["tokens"] = nlohmann::ordered_json::array();
    for (const auto& t : d.tokens) {
      if (t.is_cite()) {
        toks.push_back({"c", t.citation()});
      } else {
        toks.push_back({"w", t.term()});
      }
    }
    detail::write_metadata(obj, d.metadata);
    out << obj.dump() << '\n';
  }
}

inline std::vector<Document> read_tokens_jsonl(std::istream& in) {
  std::vector<Document> docs;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t n) {
    Document d{detail::require_string(obj, "id", n), {}, detail::read_metadata(obj, n)};
    for (const auto& t : detail::require(obj, "tokens", n)) {
      if (t.size() == 2 && t[0] == "w" && t[1].is_string()) {
        d.tokens.push_back(Token::word(t[1].get<std::string>()));
      } else if (t.size() == 2 && t[0] == "c" && t[1].is_number_unsigned()) {
        d.tokens.push_back(Token::cite(t[1].get<Index>()));
      } else {
        throw FormatError("line " + std::to_string(n) + ": bad token " + t.dump());
      }
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitRatios {
  double train = 0.72;
  double validation = 0.18;
  double test = 0.10;
};

inline constexpr std::size_t kTestFolds = 6;

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::vector<std::vector<std::string>> test_folds;

  friend bool operator==(const CorpusSplit&, const CorpusSplit&) = default;

  // Fold number of each test id.
  std::unordered_map<std::string, std::size_t> fold_of() const {
    std::unordered_map<std::string, std::size_t> out;
    for (std::size_t f = 0; f < test_folds.size(); ++f) {
      for (const auto& id : test_folds[f]) out.emplace(id, f);
    }
    return out;
  }
};

// Seeded shuffle keyed on id content (so input order does not matter), then
// contiguous slices sized by largest-remainder rounding. Test fold i holds the
// test ids at positions congruent to i mod 6.
inline CorpusSplit split_corpus(std::vector<std::string> ids, SplitRatios ratios,
                                std::uint64_t seed) {
  const double parts[3] = {ratios.train, ratios.validation, ratios.test};
  for (double r : parts) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("split ratios must be >= 0");
  }
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    throw InvalidArgument("split: document ids must be distinct");
  }

  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  keyed.reserve(ids.size());
  for (auto& id : ids) keyed.emplace_back(mix_seed(seed, id), std::move(id));
  std::ranges::sort(keyed);

  const std::size_t n = keyed.size();
  std::size_t sizes[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = parts[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best] + 1e-12) best = i;
    }
    ++sizes[best];
    frac[best] = -1.0;
    ++assigned;
  }
  if (sizes[2] < kTestFolds) {
    throw InvalidArgument("split: test set has " + std::to_string(sizes[2]) +
                          " documents; at least 6 are needed to form the folds");
  }

  CorpusSplit out;
  std::size_t pos = 0;
  for (auto* part : {&out.train, &out.validation, &out.test}) {
    const std::size_t k = sizes[part == &out.train ? 0 : part == &out.validation ? 1 : 2];
    for (std::size_t i = 0; i < k; ++i) part->push_back(std::move(keyed[pos++].second));
  }
  out.test_folds.resize(kTestFolds);
  for (std::size_t i = 0; i < out.test.size(); ++i) {
    out.test_folds[i % kTestFolds].push_back(out.test[i]);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const CorpusSplit& s) {
  nlohmann::ordered_json j;
  j["train"] = s.train;
  j["validation"] = s.validation;
  j["test"] = s.test;
  j["test_folds"] = s.test_folds;
  return j;
}

inline CorpusSplit split_from_json(const nlohmann::json& j) {
  CorpusSplit s;
  try {
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.test_folds = j.at("test_folds").get<std::vector<std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split json: ") + e.what());
  }
  return s;
}

}  // namespace citerec
