#pragma once

// Synthetic opinion corpus with planted structure, for tests and demos.
//
// Citations are grouped into co-citation cliques. A document picks one
// clique and draws each citation from it with probability clique_prob,
// otherwise uniformly from all citations. Every citation owns a set of
// signature words, and the text block preceding each citation mentions a few
// of them among filler words. Issue area follows the clique, so the
// metadata carries signal too. Some citations use a reporter outside the
// authority whitelist and resolve to UNK.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/corpus.hpp"
#include "citerec/csv.hpp"
#include "citerec/hash.hpp"
#include "citerec/stopwords.hpp"

namespace citerec::synthetic {

struct Options {
  std::size_t docs = 500;
  std::size_t cliques = 10;
  std::size_t clique_size = 6;
  double clique_prob = 0.6;
  std::size_t signature_words = 10;
  std::size_t signature_per_mention = 4;
  std::size_t filler_vocabulary = 300;
  std::size_t min_citations = 6;
  std::size_t max_citations = 10;
  std::size_t block_min = 14;
  std::size_t block_max = 24;
  double unknown_prob = 0.04;
  std::size_t issue_areas = 8;
  std::size_t judges = 30;
  std::uint64_t seed = 7;
};

struct CitationSpec {
  CitationClass cls = CitationClass::Case;
  std::string text;  // as rendered in opinions
  std::string key;   // expected normalized key
  std::vector<std::string> signature;
  std::size_t clique = 0;
};

struct Corpus {
  std::vector<RawDocument> docs;
  std::vector<AuthorityRecord> authorities;
  std::vector<CitationSpec> citations;
};

namespace detail {
inline std::string pseudo_word(Rng& rng, std::size_t syllables) {
  static constexpr std::string_view kOnset = "bcdfghjklmnprstvz";
  static constexpr std::string_view kVowel = "aeiou";
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w.push_back(kOnset[rng.below(kOnset.size())]);
    w.push_back(kVowel[rng.below(kVowel.size())]);
  }
  if (rng.bernoulli(0.5)) w.push_back(kOnset[rng.below(kOnset.size())]);
  return w;
}

inline std::string fresh_word(Rng& rng, std::set<std::string>& used, std::size_t syllables) {
  while (true) {
    auto w = pseudo_word(rng, syllables);
    if (used.insert(w).second) return w;
  }
}

inline std::string capitalized(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}
}  // namespace detail

inline Corpus generate(const Options& opts = {}) {
  Rng rng(opts.seed);
  Corpus out;
  std::set<std::string> used = english_stopwords();

  std::vector<std::string> filler;
  for (std::size_t i = 0; i < opts.filler_vocabulary; ++i) {
    filler.push_back(detail::fresh_word(rng, used, 2 + rng.below(2)));
  }
  const std::vector<std::string> stop(kEnglishStopwords.begin(), kEnglishStopwords.begin() + 60);

  const std::size_t n_cites = opts.cliques * opts.clique_size;
  std::set<std::pair<int, int>> pages_used;
  for (std::size_t c = 0; c < n_cites; ++c) {
    CitationSpec spec;
    spec.clique = c / opts.clique_size;
    for (std::size_t s = 0; s < opts.signature_words; ++s) {
      spec.signature.push_back(detail::fresh_word(rng, used, 3));
    }
    switch (c % 3) {
      case 0: {
        int volume, page;
        do {
          volume = 1 + static_cast<int>(rng.below(30));
          page = 1 + static_cast<int>(rng.below(900));
        } while (!pages_used.insert({volume, page}).second);
        const int year = 1990 + static_cast<int>(rng.below(30));
        const auto name = detail::capitalized(detail::fresh_word(rng, used, 3));
        AuthorityRecord rec{volume, "Vet. App.", page, page + 3 + static_cast<int>(rng.below(12)),
                            "CLA#" + std::to_string(1000000 + c * 7919), name + " v. Brown"};
        spec.cls = CitationClass::Case;
        spec.text = name + " v. Brown, " + std::to_string(volume) + " Vet. App. " +
                    std::to_string(page) + " (" + std::to_string(year) + ")";
        spec.key = rec.authority_id;
        out.authorities.push_back(std::move(rec));
        break;
      }
      case 1: {
        const std::string atom = std::to_string(1100 + c) + "(" +
                                 std::string(1, static_cast<char>('a' + rng.below(4))) + ")";
        spec.cls = CitationClass::Statute;
        spec.text = "38 U.S.C. \xC2\xA7 " + atom;
        spec.key = spec.text;
        break;
      }
      default: {
        const std::string atom = "3." + std::to_string(100 + c);
        spec.cls = CitationClass::Regulation;
        spec.text = "38 C.F.R. \xC2\xA7 " + atom;
        spec.key = spec.text;
        break;
      }
    }
    out.citations.push_back(std::move(spec));
  }

  auto append_filler = [&](std::string& text, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      text += rng.bernoulli(0.3) ? stop[rng.below(stop.size())] : filler[rng.below(filler.size())];
      text.push_back(' ');
    }
  };

  for (std::size_t d = 0; d < opts.docs; ++d) {
    RawDocument doc;
    char id[32];
    std::snprintf(id, sizeof id, "doc%05zu", d);
    doc.id = id;
    const std::size_t clique = rng.below(opts.cliques);
    doc.metadata.year = 2000 + static_cast<int>(rng.below(20));
    doc.metadata.issue_area = rng.bernoulli(0.8) ? static_cast<int>(clique % opts.issue_areas)
                                                 : static_cast<int>(rng.below(opts.issue_areas));
    doc.metadata.vlj = static_cast<int>(rng.below(opts.judges));

    std::string text = "The Veteran appeals. ";
    append_filler(text, 20 + rng.below(20));
    text += ". ";
    const std::size_t m =
        opts.min_citations + rng.below(opts.max_citations - opts.min_citations + 1);
    for (std::size_t i = 0; i < m; ++i) {
      if (rng.bernoulli(opts.unknown_prob)) {
        append_filler(text, opts.block_min);
        text += "See " + detail::capitalized(detail::pseudo_word(rng, 3)) + " v. Jones, " +
                std::to_string(1 + rng.below(500)) + " F. Supp. " + std::to_string(1 + rng.below(900)) +
                " (1999). ";
        continue;
      }
      const std::size_t c = rng.bernoulli(opts.clique_prob)
                                ? clique * opts.clique_size + rng.below(opts.clique_size)
                                : rng.below(n_cites);
      const auto& spec = out.citations[c];
      const std::size_t len = opts.block_min + rng.below(opts.block_max - opts.block_min + 1);
      std::vector<std::string> block;
      for (std::size_t t = 0; t < len; ++t) {
        block.push_back(rng.bernoulli(0.3) ? stop[rng.below(stop.size())]
                                           : filler[rng.below(filler.size())]);
      }
      for (std::size_t s = 0; s < opts.signature_per_mention; ++s) {
        block[rng.below(block.size())] = spec.signature[rng.below(spec.signature.size())];
      }
      for (const auto& w : block) text += w + " ";
      text += "See " + spec.text + ". ";
    }
    append_filler(text, 10);
    doc.text = std::move(text);
    out.docs.push_back(std::move(doc));
  }
  return out;
}

inline void write_authorities_csv(std::ostream& out, const std::vector<AuthorityRecord>& recs) {
  csv::write_record(out, {"volume", "reporter", "first_page", "last_page", "authority_id", "case_name"});
  for (const auto& r : recs) {
    csv::write_record(out, {std::to_string(r.volume), r.reporter, std::to_string(r.first_page),
                            std::to_string(r.last_page), r.authority_id, r.case_name});
  }
}

}  // namespace citerec::synthetic
