#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/hash.hpp"

using namespace citerec;

namespace {

const std::string kSec = "\xC2\xA7";

AuthorityIndex degmetich_index() {
  AuthorityIndex idx;
  idx.add({8, "Vet. App.", 208, 212, "CLA#6456776", "Degmetich v. Brown"});
  idx.add({104, "F.3d", 1311, 1320, "CLA#1000001", "Degmetich v. Brown"});
  return idx;
}

std::vector<std::string> keys(const std::vector<NormalizedCitation>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.key);
  return out;
}

}  // namespace

TEST(Extract, CaseCitationWithYear) {
  const std::string text = "Degmetich v. Brown, 8 Vet. App. 208 (1995)";
  const auto cs = extract_citations(text);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].kind_hint, KindHint::CaseLike);
  EXPECT_EQ(cs[0].text, text);
  EXPECT_EQ(cs[0].span.start, 0u);
  EXPECT_EQ(cs[0].span.end, text.size());
}

TEST(Extract, EmptyText) { EXPECT_TRUE(extract_citations("").empty()); }

TEST(Extract, StatuteAndRegulationInOneSentence) {
  const std::string text = "see 18 U.S.C. " + kSec + kSec + " 46(a), 46(b) and 38 C.F.R. " + kSec +
                           " 3.156(a)";
  const auto cs = extract_citations(text);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].kind_hint, KindHint::UscLike);
  EXPECT_EQ(cs[0].text, "18 U.S.C. " + kSec + kSec + " 46(a), 46(b)");
  EXPECT_EQ(cs[1].kind_hint, KindHint::CfrLike);
  EXPECT_EQ(cs[1].text, "38 C.F.R. " + kSec + " 3.156(a)");
  for (const auto& c : cs) EXPECT_EQ(text.substr(c.span.start, c.span.end - c.span.start), c.text);
}

TEST(Extract, CaseInsideSentence) {
  const std::string text =
      "The Board notes that, in Gilbert v. Derwinski, 1 Vet. App. 49, 53 (1990), the Court held "
      "otherwise.";
  const auto cs = extract_citations(text);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].text, "Gilbert v. Derwinski, 1 Vet. App. 49, 53 (1990)");
}

TEST(Extract, SignalWordNotPartOfName) {
  const auto cs = extract_citations("See Shedden v. Principi, 381 F.3d 1163 (Fed. Cir. 2004).");
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].text, "Shedden v. Principi, 381 F.3d 1163 (Fed. Cir. 2004)");
}

TEST(Extract, ShortFormsAreText) {
  EXPECT_TRUE(extract_citations("Id. at 210.").empty());
  EXPECT_TRUE(extract_citations("Degmetich, supra, at 209.").empty());
  EXPECT_TRUE(extract_citations("the veteran v. the Secretary").empty());
}

TEST(Extract, SectionSignRequired) {
  EXPECT_TRUE(extract_citations("under 38 U.S.C. chapter 11").empty());
}

TEST(Extract, SpansSortedAndDisjointOnRandomText) {
  const std::vector<std::string> pieces = {
      "the Veteran ", "See ", "Degmetich v. Brown, 8 Vet. App. 208 (1995)", ", ",
      "38 U.S.C. " + kSec + " 5107(b)", "; ", "38 C.F.R. " + kSec + kSec + " 3.102, 3.159",
      " and ", "Smith v. Jones", " v. ", "12 ", "F.3d ", "(2004) ", kSec, " U.S.C. ",
      "Id. at 3. ", "Allday v. Brown, 7 Vet. App. 517, 527 (1995)"};
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) text += pieces[rng.below(pieces.size())];
    const auto cs = extract_citations(text);
    std::size_t last_end = 0;
    for (const auto& c : cs) {
      ASSERT_GT(c.span.end, c.span.start) << text;
      ASSERT_GE(c.span.start, last_end) << text;
      ASSERT_EQ(text.substr(c.span.start, c.span.end - c.span.start), c.text) << text;
      last_end = c.span.end;
    }
  }
}

TEST(Reporter, CanonicalForms) {
  EXPECT_EQ(canonical_reporter("Vet.App."), "Vet. App.");
  EXPECT_EQ(canonical_reporter("Vet.  App."), "Vet. App.");
  EXPECT_EQ(canonical_reporter("F. 3d"), "F.3d");
  EXPECT_EQ(canonical_reporter("F.3d"), "F.3d");
}

TEST(Normalize, DegmetichResolvesToAuthority) {
  const auto idx = degmetich_index();
  const auto cs = extract_citations("Degmetich v. Brown, 8 Vet. App. 208 (1995)");
  ASSERT_EQ(cs.size(), 1u);
  const auto n = normalize(cs[0], idx);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].cls, CitationClass::Case);
  EXPECT_EQ(n[0].key, "CLA#6456776");
}

TEST(Normalize, PinciteInsideIntervalResolves) {
  const auto idx = degmetich_index();
  EXPECT_EQ(keys(normalize_text("Degmetich v. Brown, 8 Vet. App. 210 (1995)", idx)),
            std::vector<std::string>{"CLA#6456776"});
  EXPECT_EQ(keys(normalize_text("Degmetich v. Brown, 8 Vet.App. 208, 211 (1995)", idx)),
            std::vector<std::string>{"CLA#6456776"});
  EXPECT_EQ(keys(normalize_text("Degmetich v. Brown, 8 Vet. App. 213 (1995)", idx)),
            std::vector<std::string>{std::string(kUnknownKey)});
}

TEST(Normalize, ExactFirstPageBeatsEnclosingInterval) {
  AuthorityIndex idx;
  idx.add({5, "Vet. App.", 100, 130, "LONG", ""});
  idx.add({5, "Vet. App.", 120, 125, "SHORT", ""});
  EXPECT_EQ(idx.find(5, "Vet. App.", 120)->authority_id, "SHORT");
  EXPECT_EQ(idx.find(5, "Vet. App.", 110)->authority_id, "LONG");
  EXPECT_EQ(idx.find(5, "Vet. App.", 131), nullptr);
}

TEST(Normalize, StatuteTailSplitsIntoAtoms) {
  const auto cs = extract_citations("18 U.S.C. " + kSec + kSec + " 46(a), 46(b)");
  ASSERT_EQ(cs.size(), 1u);
  const auto n = normalize(cs[0], AuthorityIndex{});
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].cls, CitationClass::Statute);
  EXPECT_EQ(n[0].key, "18 U.S.C. " + kSec + " 46(a)");
  EXPECT_EQ(n[1].key, "18 U.S.C. " + kSec + " 46(b)");
}

TEST(Normalize, UnknownReporterIsSentinel) {
  const auto n = normalize_text("Hodge v. West, 155 F. Supp. 2d 1356 (1998)", degmetich_index());
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].cls, CitationClass::Unknown);
  EXPECT_EQ(n[0].key, kUnknownKey);
}

TEST(Normalize, VolumeAbsentFromIndexIsSentinel) {
  const auto n = normalize_text("Degmetich v. Brown, 9 Vet. App. 208 (1995)", degmetich_index());
  ASSERT_EQ(n.size(), 1u);
  EXPECT_TRUE(n[0].is_unknown());
}

TEST(Normalize, AtomCanonicalForm) {
  const AuthorityIndex idx;
  EXPECT_EQ(keys(normalize_text("38 U.S.C.A. " + kSec + " 5107(b) (West 2002)", idx)),
            std::vector<std::string>{"38 U.S.C. " + kSec + " 5107(b)"});
  EXPECT_EQ(keys(normalize_text("38 C.F.R. " + kSec + " 3.102 (2012)", idx)),
            std::vector<std::string>{"38 C.F.R. " + kSec + " 3.102"});
  EXPECT_EQ(keys(normalize_text("38 C.F.R. " + kSec + kSec + " 3.303(a), 3.304 and 3.307", idx)),
            (std::vector<std::string>{"38 C.F.R. " + kSec + " 3.303(a)", "38 C.F.R. " + kSec + " 3.304",
                                      "38 C.F.R. " + kSec + " 3.307"}));
}

TEST(Normalize, EmptyTailIsUnknown) {
  const auto n = normalize_text("38 U.S.C. " + kSec + " , and more", AuthorityIndex{});
  for (const auto& c : n) EXPECT_TRUE(c.is_unknown());
}

TEST(Normalize, RenderedAtomsRoundTrip) {
  const AuthorityIndex idx;
  const auto first = normalize_text(
      "38 U.S.C. " + kSec + kSec + " 1110, 1131(a)(2); 38 C.F.R. " + kSec + " 3.310(a) (2006)", idx);
  ASSERT_EQ(first.size(), 3u);
  for (const auto& c : first) {
    const auto again = normalize_text("as provided in " + c.key + ".", idx);
    ASSERT_EQ(again.size(), 1u) << c.key;
    EXPECT_EQ(again[0], c);
  }
}

TEST(Normalize, Deterministic) {
  const auto idx = degmetich_index();
  const std::string text = "Degmetich v. Brown, 8 Vet. App. 208 (1995); 38 C.F.R. " + kSec + " 3.1";
  EXPECT_EQ(normalize_text(text, idx), normalize_text(text, idx));
}

TEST(Authorities, CsvWithWhitelist) {
  std::istringstream in(
      "volume,reporter,first_page,last_page,authority_id,case_name\n"
      "8,Vet. App.,208,212,CLA#6456776,Degmetich v. Brown\n"
      "381,F. 3d,1163,1170,CLA#2,\"Shedden v. Principi\"\n"
      "155,F. Supp. 2d,1356,1360,CLA#3,\"Hodge, Jr. v. West\"\n");
  const auto idx = AuthorityIndex::from_csv(in);
  EXPECT_EQ(idx.size(), 2u);
  EXPECT_EQ(idx.skipped(), 1u);
  ASSERT_NE(idx.find(381, "F.3d", 1165), nullptr);
  EXPECT_EQ(idx.find(381, "F.3d", 1165)->authority_id, "CLA#2");
}

TEST(Authorities, DuplicateKeyRejected) {
  AuthorityIndex idx;
  idx.add({1, "Vet. App.", 49, 60, "A", ""});
  EXPECT_THROW(idx.add({1, "Vet.App.", 49, 55, "B", ""}), FormatError);
  EXPECT_THROW(idx.add({1, "Vet. App.", 70, 69, "C", ""}), FormatError);
}

TEST(Authorities, BadHeader) {
  std::istringstream in("vol,rep\n1,2\n");
  EXPECT_THROW(AuthorityIndex::from_csv(in), FormatError);
}

namespace {
std::vector<NormalizedCitation> stream_of(std::initializer_list<std::pair<const char*, int>> spec) {
  std::vector<NormalizedCitation> out;
  for (const auto& [key, n] : spec) {
    for (int i = 0; i < n; ++i) out.push_back({CitationClass::Case, key});
  }
  return out;
}
}  // namespace

TEST(Vocabulary, PrunesIntoUnk) {
  const auto v = build_vocabulary(stream_of({{"A", 25}, {"B", 19}, {"C", 3}}), 20);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].citation.key, "A");
  EXPECT_EQ(v[0].count, 25u);
  EXPECT_EQ(v[1].citation.key, kUnknownKey);
  EXPECT_EQ(v[1].count, 22u);
  EXPECT_EQ(v.unk_index(), 1u);
}

TEST(Vocabulary, EmptyStream) {
  const auto v = build_vocabulary(std::vector<NormalizedCitation>{}, 20);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(v[0].citation.is_unknown());
  EXPECT_EQ(v[0].count, 0u);
}

TEST(Vocabulary, TiesByKey) {
  const auto v = build_vocabulary(stream_of({{"B", 5}, {"A", 5}}), 5);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].citation.key, "A");
  EXPECT_EQ(v[1].citation.key, "B");
  EXPECT_EQ(v[2].citation.key, kUnknownKey);
  EXPECT_EQ(v.lookup("B"), 1u);
  EXPECT_EQ(v.lookup("nope"), v.unk_index());
}

TEST(Vocabulary, UnknownOccurrencesCountTowardUnk) {
  auto s = stream_of({{"A", 3}});
  s.push_back(NormalizedCitation::unknown());
  s.push_back(NormalizedCitation::unknown());
  const auto v = build_vocabulary(s, 1);
  EXPECT_EQ(v[v.unk_index()].count, 2u);
}

TEST(Vocabulary, PruningSoundnessOnRandomStreams) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<NormalizedCitation> s;
    const auto n = rng.below(400);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(0.05)) {
        s.push_back(NormalizedCitation::unknown());
      } else {
        s.push_back({CitationClass::Statute, "K" + std::to_string(rng.below(30))});
      }
    }
    const std::uint64_t min_count = 1 + rng.below(15);
    const auto v = build_vocabulary(s, min_count);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& e = v[static_cast<Index>(i)];
      total += e.count;
      if (!e.citation.is_unknown()) {
        EXPECT_GE(e.count, min_count);
      }
      if (i > 0) {
        const auto& prev = v[static_cast<Index>(i - 1)];
        EXPECT_TRUE(prev.count > e.count ||
                    (prev.count == e.count && prev.citation.key < e.citation.key));
      }
    }
    EXPECT_EQ(total, s.size());
  }
}

TEST(Vocabulary, TsvRoundTripIsByteStable) {
  const auto v = build_vocabulary(stream_of({{"CLA#1", 7}, {"CLA#2", 3}, {"CLA#3", 1}}), 2);
  std::ostringstream a;
  v.write_tsv(a);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "index\tclass\tkey\tcount");
  std::istringstream in(a.str());
  const auto back = CitationVocabulary::read_tsv(in);
  EXPECT_EQ(back, v);
  std::ostringstream b;
  back.write_tsv(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Vocabulary, RejectsMinCountZero) {
  EXPECT_THROW(build_vocabulary(std::vector<NormalizedCitation>{}, 0), InvalidArgument);
}
