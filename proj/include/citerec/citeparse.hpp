#pragma once

// Citation extraction and normalization.
//
// Three pattern families are recognized in opinion text:
//
//   case        <Name> v. <Name>, <volume> <Reporter> <page>[, <pincite>]
//               [ ([court] <year>)]
//   statute     <chapter> U.S.C.[A.] §[§] <atom>[, <atom>]...[ (<year>)]
//   regulation  <chapter> C.F.R. §[§] <atom>[, <atom>]...[ (<year>)]
//
// Atoms are separated by commas, "and" or "or". An atom is a section number
// (starting with a digit, dotted or hyphenated parts allowed) followed by
// any number of sub-paragraph parentheses, e.g. "3.156(a)" or "5103A(b)(1)".
// Short forms ("id.", "supra") are ordinary text.
//
// The case grammar is anchored on " v. ". The left party name is collected
// backwards from the anchor over capitalized tokens and a few connector words
// ("of", "the", "&", ...). Collection stops at signal words ("See", "In",
// "cf."), at tokens with trailing ',' ';' ':' and at sentence-final tokens.
// Any reporter-shaped token sequence is extracted; whether it resolves is up
// to the AuthorityIndex and its reporter whitelist.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citerec/csv.hpp"
#include "citerec/error.hpp"
#include "citerec/sparse.hpp"

namespace citerec {

enum class KindHint { CaseLike, UscLike, CfrLike };

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct RawCitation {
  std::string text;
  Span span;
  KindHint kind_hint = KindHint::CaseLike;

  friend bool operator==(const RawCitation&, const RawCitation&) = default;
};

enum class CitationClass { Case, Statute, Regulation, Unknown };

inline constexpr std::string_view kUnknownKey = "UNK_CITATION";

inline std::string_view to_string(CitationClass c) {
  switch (c) {
    case CitationClass::Case: return "case";
    case CitationClass::Statute: return "statute";
    case CitationClass::Regulation: return "regulation";
    case CitationClass::Unknown: break;
  }
  return "unknown";
}

inline CitationClass citation_class_from_string(std::string_view s) {
  if (s == "case") return CitationClass::Case;
  if (s == "statute") return CitationClass::Statute;
  if (s == "regulation") return CitationClass::Regulation;
  if (s == "unknown") return CitationClass::Unknown;
  throw FormatError("unknown citation class '" + std::string(s) + "'");
}

// Canonical citation identity. Class Unknown if and only if key is the
// UNK_CITATION sentinel.
struct NormalizedCitation {
  CitationClass cls = CitationClass::Unknown;
  std::string key{kUnknownKey};

  static NormalizedCitation unknown() { return {}; }
  bool is_unknown() const noexcept { return cls == CitationClass::Unknown; }

  friend bool operator==(const NormalizedCitation&, const NormalizedCitation&) = default;
};

namespace detail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
inline bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

inline constexpr std::string_view kSection = "\xC2\xA7";  // U+00A7
inline constexpr std::string_view kNbsp = "\xC2\xA0";     // U+00A0

inline bool space_at(std::string_view t, std::size_t p) {
  if (p >= t.size()) return false;
  return is_ascii_space(t[p]) || t.substr(p, 2) == kNbsp;
}

inline std::size_t skip_ws(std::string_view t, std::size_t p) {
  while (p < t.size()) {
    if (is_ascii_space(t[p])) {
      ++p;
    } else if (t.substr(p, 2) == kNbsp) {
      p += 2;
    } else {
      break;
    }
  }
  return p;
}

// Position just past the whitespace run that ends at p (exclusive), scanning
// left. Returns p unchanged if no whitespace precedes it.
inline std::size_t skip_ws_back(std::string_view t, std::size_t p) {
  while (p > 0) {
    if (is_ascii_space(t[p - 1])) {
      --p;
    } else if (p >= 2 && t.substr(p - 2, 2) == kNbsp) {
      p -= 2;
    } else {
      break;
    }
  }
  return p;
}

inline std::size_t digit_run(std::string_view t, std::size_t p) {
  std::size_t q = p;
  while (q < t.size() && is_digit(t[q])) ++q;
  return q;
}

inline bool is_year(std::string_view s) {
  if (s.size() != 4 || !std::ranges::all_of(s, is_digit)) return false;
  const int y = std::stoi(std::string(s));
  return y >= 1700 && y <= 2099;
}

inline bool one_of(std::string_view s, std::initializer_list<std::string_view> set) {
  return std::ranges::find(set, s) != set.end();
}

inline bool is_signal_word(std::string_view tok) {
  return one_of(tok, {"See", "see", "Cf.", "cf.", "Accord", "accord", "But", "but",
                      "E.g.", "e.g.", "Compare", "compare", "Also", "also", "Citing",
                      "citing", "Quoting", "quoting", "In", "in", "Under", "under",
                      "Per", "per", "Thus", "thus", "Therefore", "Moreover", "However",
                      "As", "as", "And", "Although", "When", "Because", "While",
                      "Since", "Id.", "id.", "with", "by", "from", "at"});
}

inline bool is_connector(std::string_view tok) {
  return one_of(tok, {"of", "the", "and", "&", "ex", "rel.", "for", "de", "la", "van",
                      "von", "der", "du", "on", "to"});
}

// A token ending in '.' is an abbreviation (kept inside a name) when it is
// short or dotted/apostrophized internally; otherwise it ends a sentence.
inline bool is_abbreviation(std::string_view tok) {
  if (tok.empty() || tok.back() != '.') return false;
  const auto body = tok.substr(0, tok.size() - 1);
  if (body.find_first_of(".'") != std::string_view::npos) return true;
  return body.size() <= 4;
}

inline bool is_name_token(std::string_view tok) {
  if (tok.empty()) return false;
  if (is_connector(tok)) return true;
  if (!is_upper(tok.front())) return false;
  if (tok.back() == '.' && !is_abbreviation(tok)) return false;
  for (char c : tok) {
    const auto u = static_cast<unsigned char>(c);
    if (!(is_alnum(c) || c == '.' || c == '\'' || c == '-' || c == '&' || u >= 0x80)) {
      return false;
    }
  }
  return true;
}

// Leftmost byte of the left party name ending before the " v." at vpos.
inline std::optional<std::size_t> scan_case_left(std::string_view t, std::size_t vpos) {
  constexpr int kMaxTokens = 10;
  std::vector<std::pair<std::size_t, std::string_view>> accepted;
  std::size_t q = skip_ws_back(t, vpos);
  for (int n = 0; n < kMaxTokens && q > 0; ++n) {
    const std::size_t tok_end = q;
    std::size_t tok_start = tok_end;
    while (tok_start > 0 && !is_ascii_space(t[tok_start - 1]) &&
           !(tok_start >= 2 && t.substr(tok_start - 2, 2) == kNbsp)) {
      --tok_start;
    }
    std::string_view tok = t.substr(tok_start, tok_end - tok_start);
    if (tok.empty() || tok.back() == ',' || tok.back() == ';' || tok.back() == ':') break;
    // Opening punctuation marks the beginning of the name.
    std::size_t lead = 0;
    while (lead < tok.size() && (tok[lead] == '(' || tok[lead] == '"' || tok[lead] == '[' ||
                                 tok[lead] == '\'')) {
      ++lead;
    }
    if (lead == 0 && tok.substr(0, 3) == "\xE2\x80\x9C") lead = 3;  // left double quote
    const std::string_view body = tok.substr(lead);
    if (is_signal_word(body) || !is_name_token(body)) break;
    accepted.emplace_back(tok_start + lead, body);
    if (lead > 0) break;
    q = skip_ws_back(t, tok_start);
    if (q == tok_start) break;
  }
  while (!accepted.empty() && is_connector(accepted.back().second)) accepted.pop_back();
  if (accepted.empty() || !is_upper(accepted.back().second.front())) return std::nullopt;
  return accepted.back().first;
}

struct CaseTail {
  std::size_t end = 0;
  int volume = 0;
  std::string reporter;  // as written, single-spaced
  int page = 0;
};

inline bool is_reporter_token(std::string_view tok) {
  bool letter = false;
  for (char c : tok) {
    if (is_alpha(c)) {
      letter = true;
    } else if (!(is_digit(c) || c == '.' || c == '\'')) {
      return false;
    }
  }
  return letter;
}

// Parses "<Name>, <vol> <Reporter> <page>[, pin][ (... yyyy)]" starting right
// after the "v." anchor.
inline std::optional<CaseTail> parse_case_right(std::string_view t, std::size_t p) {
  p = skip_ws(t, p);
  if (p >= t.size() || !is_upper(t[p])) return std::nullopt;
  const std::size_t comma = t.find(',', p);
  if (comma == std::string_view::npos || comma - p > 160) return std::nullopt;
  {
    std::size_t q = p;
    int tokens = 0;
    while (q < comma) {
      const std::size_t s = q;
      while (q < comma && !space_at(t, q)) ++q;
      const std::string_view tok = t.substr(s, q - s);
      if (!is_name_token(tok) || ++tokens > 12) return std::nullopt;
      q = skip_ws(t, q);
    }
    if (tokens == 0) return std::nullopt;
  }

  CaseTail tail;
  std::size_t q = skip_ws(t, comma + 1);
  std::size_t e = digit_run(t, q);
  if (e == q || e - q > 4 || !space_at(t, e)) return std::nullopt;
  tail.volume = std::stoi(std::string(t.substr(q, e - q)));
  q = skip_ws(t, e);

  std::vector<std::string_view> reporter;
  while (true) {
    e = digit_run(t, q);
    if (e > q && (e == t.size() || !is_alnum(t[e]))) break;  // page number
    std::size_t s = q;
    while (q < t.size() && (is_alnum(t[q]) || t[q] == '.' || t[q] == '\'')) ++q;
    const std::string_view tok = t.substr(s, q - s);
    if (!is_reporter_token(tok) || !space_at(t, q) || reporter.size() >= 4) {
      return std::nullopt;
    }
    if (reporter.empty() && !is_upper(tok.front())) return std::nullopt;
    reporter.push_back(tok);
    q = skip_ws(t, q);
  }
  if (reporter.empty() || e - q > 5) return std::nullopt;
  for (std::size_t i = 0; i < reporter.size(); ++i) {
    if (i) tail.reporter.push_back(' ');
    tail.reporter.append(reporter[i]);
  }
  tail.page = std::stoi(std::string(t.substr(q, e - q)));
  tail.end = e;

  // Pincite, accepted only when it cannot be the chapter of a following
  // statute citation.
  if (tail.end < t.size() && t[tail.end] == ',') {
    std::size_t r = skip_ws(t, tail.end + 1);
    std::size_t d = digit_run(t, r);
    if (d > r) {
      if (d + 1 < t.size() && t[d] == '-' && is_digit(t[d + 1])) d = digit_run(t, d + 1);
      const std::size_t after = skip_ws(t, d);
      if (after == t.size() || std::string_view("(.;,)").find(t[after]) != std::string_view::npos) {
        tail.end = d;
      }
    }
  }

  // Optional "(yyyy)" or "(Court yyyy)".
  const std::size_t r = skip_ws(t, tail.end);
  if (r < t.size() && t[r] == '(') {
    const std::size_t close = t.find(')', r);
    if (close != std::string_view::npos && close - r <= 48 && close - r >= 5) {
      const auto inner = t.substr(r + 1, close - r - 1);
      const auto year = inner.substr(inner.size() - 4);
      const auto court = inner.substr(0, inner.size() - 4);
      const bool court_ok =
          court.empty() ||
          (court.back() == ' ' && std::ranges::all_of(court, [](char c) {
             return is_alpha(c) || c == '.' || c == ' ' || c == '\'' || is_digit(c);
           }));
      if (is_year(year) && court_ok) tail.end = close + 1;
    }
  }
  return tail;
}

struct StatuteMatch {
  std::size_t start = 0;
  std::size_t end = 0;
  int chapter = 0;
  KindHint kind = KindHint::UscLike;
  std::vector<std::string> atoms;  // raw atom text, not yet canonicalized
};

// One section atom starting at p: returns its end, or p if none.
inline std::size_t parse_atom(std::string_view t, std::size_t p) {
  if (p >= t.size() || !is_digit(t[p])) return p;
  std::size_t q = p;
  while (q < t.size() && is_alnum(t[q])) ++q;
  while (q + 1 < t.size() && (t[q] == '.' || t[q] == '-') && is_alnum(t[q + 1])) {
    ++q;
    while (q < t.size() && is_alnum(t[q])) ++q;
  }
  while (true) {
    std::size_t r = q;
    if (r < t.size() && t[r] == ' ') ++r;
    if (r >= t.size() || t[r] != '(') break;
    const std::size_t s = r + 1;
    std::size_t e = s;
    while (e < t.size() && is_alnum(t[e])) ++e;
    if (e == s || e - s > 6 || e >= t.size() || t[e] != ')') break;
    if (is_year(t.substr(s, e - s))) break;
    q = e + 1;
  }
  return q;
}

// Trailing "(2012)" or "(West 2002)".
inline std::size_t skip_year_parenthetical(std::string_view t, std::size_t end) {
  const std::size_t r = skip_ws(t, end);
  if (r >= t.size() || t[r] != '(') return end;
  std::size_t q = r + 1;
  while (q < t.size() && (is_alpha(t[q]) || t[q] == '.')) ++q;
  if (q > r + 1) {
    if (q >= t.size() || t[q] != ' ') return end;
    ++q;
  }
  const std::size_t d = digit_run(t, q);
  if (!is_year(t.substr(q, d - q)) || d >= t.size() || t[d] != ')') return end;
  return d + 1;
}

// Parses a statute/regulation citation whose anchor ("U.S.C" / "C.F.R")
// begins at anchor_pos.
inline std::optional<StatuteMatch> parse_statute_at(std::string_view t, std::size_t anchor_pos) {
  StatuteMatch m;
  std::size_t p = anchor_pos;
  if (t.substr(p, 6) == "U.S.C.") {
    m.kind = KindHint::UscLike;
    p += 6;
    if (t.substr(p, 2) == "A.") p += 2;
  } else if (t.substr(p, 6) == "C.F.R.") {
    m.kind = KindHint::CfrLike;
    p += 6;
  } else {
    return std::nullopt;
  }

  const std::size_t before = skip_ws_back(t, anchor_pos);
  if (before == anchor_pos || before == 0) return std::nullopt;
  std::size_t cs = before;
  while (cs > 0 && is_digit(t[cs - 1])) --cs;
  if (cs == before || before - cs > 3) return std::nullopt;
  if (cs > 0 && is_alnum(t[cs - 1])) return std::nullopt;
  m.chapter = std::stoi(std::string(t.substr(cs, before - cs)));
  m.start = cs;

  p = skip_ws(t, p);
  if (t.substr(p, 2) != kSection) return std::nullopt;
  p += 2;
  if (t.substr(p, 2) == kSection) p += 2;
  m.end = p;

  std::size_t q = skip_ws(t, p);
  std::size_t e = parse_atom(t, q);
  if (e == q) return m;  // anchor without a parseable section: resolves to unknown
  m.atoms.emplace_back(t.substr(q, e - q));
  m.end = e;

  while (true) {
    std::size_t s = m.end;
    std::size_t r = skip_ws(t, s);
    bool sep = false;
    if (r < t.size() && t[r] == ',') {
      r = skip_ws(t, r + 1);
      sep = true;
    }
    for (std::string_view word : {"and", "or"}) {
      if (t.substr(r, word.size()) == word && space_at(t, r + word.size()) &&
          (sep || r > s)) {
        r = skip_ws(t, r + word.size());
        sep = true;
        break;
      }
    }
    if (!sep) break;
    e = parse_atom(t, r);
    if (e == r) break;
    // "..., 38 C.F.R." : the number is the next citation's chapter.
    const std::size_t look = skip_ws(t, e);
    if (look > e && look < t.size() && is_upper(t[look])) break;
    m.atoms.emplace_back(t.substr(r, e - r));
    m.end = e;
  }
  m.end = skip_year_parenthetical(t, m.end);
  return m;
}

inline std::string canonical_atom(std::string_view raw) {
  std::string out;
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (is_ascii_space(c)) {
      ++i;
      continue;
    }
    if (c == '(') {
      const std::size_t close = raw.find(')', i);
      if (close != std::string_view::npos && is_year(raw.substr(i + 1, close - i - 1))) {
        i = close + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

}  // namespace detail

// Canonical reporter spelling: internal whitespace collapsed and a single
// space between abbreviation parts, except that adjacent "short" parts
// (single letters and ordinals like "3d") close up. "Vet.App." becomes
// "Vet. App.", "F. 3d" becomes "F.3d", "U. S." becomes "U.S.".
inline std::string canonical_reporter(std::string_view raw) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : raw) {
    if (detail::is_ascii_space(c)) {
      if (!cur.empty()) parts.push_back(std::exchange(cur, {}));
    } else if (c == '.') {
      cur.push_back('.');
      parts.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));

  auto is_short = [](std::string_view part) {
    if (!part.empty() && part.back() == '.') part.remove_suffix(1);
    if (part.size() == 1 && detail::is_alpha(part[0])) return true;
    std::size_t d = 0;
    while (d < part.size() && detail::is_digit(part[d])) ++d;
    const auto suffix = part.substr(d);
    return d > 0 && (suffix == "d" || suffix == "st" || suffix == "nd" ||
                     suffix == "rd" || suffix == "th");
  };

  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0 && !(is_short(parts[i - 1]) && is_short(parts[i]))) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

// Finds all citations in text, left to right. When candidate spans overlap
// the leftmost wins, and among equal starts the longest.
inline std::vector<RawCitation> extract_citations(std::string_view text) {
  struct Candidate {
    Span span;
    KindHint kind;
  };
  std::vector<Candidate> found;

  for (std::size_t pos = text.find("v."); pos != std::string_view::npos;
       pos = text.find("v.", pos + 1)) {
    if (pos == 0 || !detail::is_ascii_space(text[pos - 1]) ||
        !detail::space_at(text, pos + 2)) {
      continue;
    }
    const auto tail = detail::parse_case_right(text, pos + 2);
    if (!tail) continue;
    const auto start = detail::scan_case_left(text, pos);
    if (!start) continue;
    found.push_back({{*start, tail->end}, KindHint::CaseLike});
  }

  for (std::string_view anchor : {"U.S.C.", "C.F.R."}) {
    for (std::size_t pos = text.find(anchor); pos != std::string_view::npos;
         pos = text.find(anchor, pos + 1)) {
      if (const auto m = detail::parse_statute_at(text, pos)) {
        found.push_back({{m->start, m->end}, m->kind});
      }
    }
  }

  std::ranges::sort(found, [](const Candidate& a, const Candidate& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end > b.span.end;
  });

  std::vector<RawCitation> out;
  std::size_t last_end = 0;
  for (const auto& c : found) {
    if (!out.empty() && c.span.start < last_end) continue;
    out.push_back({std::string(text.substr(c.span.start, c.span.end - c.span.start)),
                   c.span, c.kind});
    last_end = c.span.end;
  }
  return out;
}

struct AuthorityRecord {
  int volume = 0;
  std::string reporter;
  int first_page = 0;
  int last_page = 0;
  std::string authority_id;
  std::string case_name;
};

// Authority list keyed by (volume, canonical reporter). Only reporters in the
// whitelist are indexed; the default covers the two reporters that dominate
// veterans' law citations.
class AuthorityIndex {
 public:
  static std::vector<std::string> default_reporters() { return {"Vet. App.", "F.3d"}; }

  AuthorityIndex() : AuthorityIndex(default_reporters()) {}
  explicit AuthorityIndex(const std::vector<std::string>& reporters) {
    for (const auto& r : reporters) reporters_.insert(canonical_reporter(r));
  }

  // Returns false (and ignores the record) when its reporter is not
  // whitelisted.
  bool add(AuthorityRecord rec) {
    if (rec.volume <= 0 || rec.first_page <= 0 || rec.last_page < rec.first_page) {
      throw FormatError("authority record '" + rec.authority_id +
                        "': volume and pages must be positive with last_page >= first_page");
    }
    rec.reporter = canonical_reporter(rec.reporter);
    if (!reporters_.contains(rec.reporter)) {
      ++skipped_;
      return false;
    }
    auto& bucket = by_volume_[{rec.volume, rec.reporter}];
    auto it = std::ranges::lower_bound(bucket, rec.first_page, {}, &AuthorityRecord::first_page);
    if (it != bucket.end() && it->first_page == rec.first_page) {
      throw FormatError("duplicate authority (" + std::to_string(rec.volume) + ", " +
                        rec.reporter + ", " + std::to_string(rec.first_page) + ")");
    }
    bucket.insert(it, std::move(rec));
    ++size_;
    return true;
  }

  // Record whose page interval contains page. An exact first_page match
  // wins; otherwise the interval starting closest before the page.
  const AuthorityRecord* find(int volume, std::string_view reporter, int page) const {
    const auto it = by_volume_.find({volume, canonical_reporter(reporter)});
    if (it == by_volume_.end()) return nullptr;
    const AuthorityRecord* best = nullptr;
    for (const auto& rec : it->second) {
      if (rec.first_page > page) break;
      if (page <= rec.last_page) best = &rec;
    }
    return best;
  }

  // CSV with header volume,reporter,first_page,last_page,authority_id,case_name.
  static AuthorityIndex from_csv(std::istream& in,
                                 const std::vector<std::string>& reporters = default_reporters()) {
    static const std::vector<std::string> kHeader = {"volume",     "reporter",     "first_page",
                                                     "last_page",  "authority_id", "case_name"};
    AuthorityIndex index(reporters);
    auto header = csv::read_record(in);
    if (!header || *header != kHeader) {
      throw FormatError("authority csv: expected header volume,reporter,first_page,last_page,"
                        "authority_id,case_name");
    }
    std::size_t line = 1;
    while (auto rec = csv::read_record(in)) {
      ++line;
      if (rec->size() == 1 && (*rec)[0].empty()) continue;
      if (rec->size() != kHeader.size()) {
        throw FormatError("authority csv record " + std::to_string(line) + ": expected 6 fields");
      }
      AuthorityRecord r;
      try {
        r.volume = std::stoi((*rec)[0]);
        r.first_page = std::stoi((*rec)[2]);
        r.last_page = std::stoi((*rec)[3]);
      } catch (const std::exception&) {
        throw FormatError("authority csv record " + std::to_string(line) + ": bad integer");
      }
      r.reporter = (*rec)[1];
      r.authority_id = (*rec)[4];
      r.case_name = (*rec)[5];
      index.add(std::move(r));
    }
    return index;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t skipped() const noexcept { return skipped_; }
  bool accepts_reporter(std::string_view reporter) const {
    return reporters_.contains(canonical_reporter(reporter));
  }

 private:
  std::set<std::string> reporters_;
  std::map<std::pair<int, std::string>, std::vector<AuthorityRecord>> by_volume_;
  std::size_t size_ = 0;
  std::size_t skipped_ = 0;
};

// Resolves a raw citation to one or more canonical identities. Cases map to
// the matching authority id; statutes and regulations yield one identity per
// section atom. Every failure degrades to the UNK sentinel.
inline std::vector<NormalizedCitation> normalize(const RawCitation& raw,
                                                 const AuthorityIndex& index) {
  const std::string_view t = raw.text;
  if (raw.kind_hint == KindHint::CaseLike) {
    for (std::size_t pos = t.find(" v."); pos != std::string_view::npos;
         pos = t.find(" v.", pos + 1)) {
      const auto tail = detail::parse_case_right(t, pos + 3);
      if (!tail) continue;
      if (const auto* rec = index.find(tail->volume, tail->reporter, tail->page)) {
        return {{CitationClass::Case, rec->authority_id}};
      }
      break;
    }
    return {NormalizedCitation::unknown()};
  }

  const std::string_view anchor = raw.kind_hint == KindHint::UscLike ? "U.S.C." : "C.F.R.";
  const std::size_t pos = t.find(anchor);
  const auto m = pos == std::string_view::npos ? std::nullopt
                                               : detail::parse_statute_at(t, pos);
  if (!m || m->atoms.empty()) return {NormalizedCitation::unknown()};

  const bool usc = m->kind == KindHint::UscLike;
  const std::string prefix = std::to_string(m->chapter) + (usc ? " U.S.C. " : " C.F.R. ") +
                             std::string(detail::kSection) + " ";
  std::vector<NormalizedCitation> out;
  out.reserve(m->atoms.size());
  for (const auto& atom : m->atoms) {
    out.push_back({usc ? CitationClass::Statute : CitationClass::Regulation,
                   prefix + detail::canonical_atom(atom)});
  }
  return out;
}

// All normalized citations of a text in document order.
inline std::vector<NormalizedCitation> normalize_text(std::string_view text,
                                                      const AuthorityIndex& index) {
  std::vector<NormalizedCitation> out;
  for (const auto& raw : extract_citations(text)) {
    auto norm = normalize(raw, index);
    std::ranges::move(norm, std::back_inserter(out));
  }
  return out;
}

struct VocabEntry {
  NormalizedCitation citation;
  std::uint64_t count = 0;

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

// Pruned citation index. Entries are ordered by descending count, ties by
// ascending key; the UNK entry always exists and absorbs pruned counts.
class CitationVocabulary {
 public:
  CitationVocabulary() : CitationVocabulary(std::vector<VocabEntry>{{}}) {}

  explicit CitationVocabulary(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {
    bool have_unk = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& c = entries_[i].citation;
      if (c.is_unknown() != (c.key == kUnknownKey)) {
        throw InvalidArgument("vocabulary entry '" + c.key + "': class/key mismatch");
      }
      if (!index_of_.emplace(c.key, static_cast<Index>(i)).second) {
        throw InvalidArgument("duplicate vocabulary key '" + c.key + "'");
      }
      if (c.is_unknown()) {
        unk_index_ = static_cast<Index>(i);
        have_unk = true;
      }
    }
    if (!have_unk) throw InvalidArgument("vocabulary lacks the UNK entry");
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<VocabEntry>& entries() const noexcept { return entries_; }
  const VocabEntry& operator[](Index i) const { return entries_.at(i); }
  Index unk_index() const noexcept { return unk_index_; }

  // Index of key, or the UNK index when absent.
  Index lookup(std::string_view key) const {
    const auto it = index_of_.find(std::string(key));
    return it == index_of_.end() ? unk_index_ : it->second;
  }
  bool contains(std::string_view key) const { return index_of_.contains(std::string(key)); }

  std::vector<std::uint64_t> counts() const {
    std::vector<std::uint64_t> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.count);
    return out;
  }

  // TSV: header "index\tclass\tkey\tcount", one row per entry in order.
  void write_tsv(std::ostream& out) const {
    out << "index\tclass\tkey\tcount\n";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      out << i << '\t' << to_string(e.citation.cls) << '\t' << e.citation.key << '\t'
          << e.count << '\n';
    }
  }

  static CitationVocabulary read_tsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "index\tclass\tkey\tcount") {
      throw FormatError("vocabulary tsv: bad header");
    }
    std::vector<VocabEntry> entries;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::array<std::string, 4> f;
      std::size_t field = 0, start = 0;
      for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
          if (field >= 4) throw FormatError("vocabulary tsv: too many fields");
          f[field++] = line.substr(start, i - start);
          start = i + 1;
        }
      }
      if (field != 4) throw FormatError("vocabulary tsv: expected 4 fields: " + line);
      if (std::stoull(f[0]) != entries.size()) {
        throw FormatError("vocabulary tsv: indices must be 0..n-1 in order");
      }
      entries.push_back({{citation_class_from_string(f[1]), f[2]}, std::stoull(f[3])});
    }
    return CitationVocabulary(std::move(entries));
  }

  friend bool operator==(const CitationVocabulary& a, const CitationVocabulary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, Index> index_of_;
  Index unk_index_ = 0;
};

// Counts the stream (training citations only) and prunes entries seen fewer
// than min_count times into UNK.
template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_reference_t<R>, const NormalizedCitation&>
CitationVocabulary build_vocabulary(R&& stream, std::uint64_t min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
  std::map<std::string, std::pair<CitationClass, std::uint64_t>> counts;
  std::uint64_t unk = 0;
  for (const NormalizedCitation& c : stream) {
    if (c.is_unknown()) {
      ++unk;
      continue;
    }
    auto& slot = counts[c.key];
    slot.first = c.cls;
    ++slot.second;
  }
  std::vector<VocabEntry> entries;
  for (auto& [key, cc] : counts) {
    if (cc.second >= min_count) {
      entries.push_back({{cc.first, key}, cc.second});
    } else {
      unk += cc.second;
    }
  }
  entries.push_back({NormalizedCitation::unknown(), unk});
  std::ranges::sort(entries, [](const VocabEntry& a, const VocabEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.citation.key < b.citation.key;
  });
  return CitationVocabulary(std::move(entries));
}

}  // namespace citerec
