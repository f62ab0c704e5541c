#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "citerec/cf.hpp"
#include "oracles.hpp"

using namespace citerec;

namespace {

// Vocabulary of n named citations followed by UNK.
CitationVocabulary plain_vocab(std::size_t n) {
  std::vector<VocabEntry> e;
  for (std::size_t i = 0; i < n; ++i) {
    e.push_back({{CitationClass::Case, "C" + std::to_string(i)}, 1000 - i});
  }
  e.push_back({NormalizedCitation::unknown(), 0});
  return CitationVocabulary(std::move(e));
}

Document cite_doc(std::string id, const std::vector<Index>& cites) {
  Document d{std::move(id), {}, {}};
  for (Index c : cites) {
    d.tokens.push_back(Token::word("x"));
    d.tokens.push_back(Token::cite(c));
  }
  return d;
}

SparseVector sv(std::size_t dims, std::vector<SparseVector::Entry> pairs) {
  return SparseVector::from_pairs(dims, std::move(pairs));
}

}  // namespace

TEST(DocVector, Schemes) {
  const std::vector<Index> c = {3, 3, 5};
  EXPECT_EQ(doc_vector(c, 8, Scheme::Binary), sv(8, {{3, 1.0}, {5, 1.0}}));
  EXPECT_EQ(doc_vector(c, 8, Scheme::Tf), sv(8, {{3, 2.0}, {5, 1.0}}));
  std::vector<double> idf(8, 0.0);
  idf[3] = 0.5;
  idf[5] = 2.0;
  EXPECT_EQ(doc_vector(c, 8, Scheme::TfIdf, idf), sv(8, {{3, 1.0}, {5, 2.0}}));
  EXPECT_TRUE(doc_vector({}, 8, Scheme::Binary).empty());
  EXPECT_THROW(doc_vector(c, 8, Scheme::TfIdf), InvalidArgument);
}

TEST(SparseVector, Invariants) {
  const auto v = sv(10, {{5, 1.0}, {2, 0.0}, {1, 2.0}, {5, 0.5}});
  ASSERT_EQ(v.nnz(), 2u);
  EXPECT_EQ(v.entries()[0].first, 1u);
  EXPECT_EQ(v.entries()[1].second, 1.5);
  EXPECT_THROW(sv(3, {{3, 1.0}}), InvalidArgument);
}

TEST(Cosine, Examples) {
  const auto u = sv(8, {{3, 1}, {5, 1}});
  EXPECT_DOUBLE_EQ(cosine(u, u), 1.0);
  EXPECT_EQ(cosine(sv(8, {{3, 1}}), sv(8, {{5, 1}})), 0.0);
  EXPECT_DOUBLE_EQ(cosine(sv(8, {{1, 1}, {2, 1}}), sv(8, {{2, 1}, {3, 1}})), 0.5);
  EXPECT_EQ(cosine(sv(8, {}), u), 0.0);
  EXPECT_THROW(cosine(sv(8, {}), sv(9, {})), InvalidArgument);
}

TEST(CfRecommend, SharedNeighborsGiveUnitScore) {
  // A=0, B=1, C=2
  const auto vocab = plain_vocab(3);
  const std::vector<Document> train = {cite_doc("d1", {0, 1, 2}), cite_doc("d2", {0, 1, 2})};
  const auto m = CfModel::build(train, vocab, Scheme::Binary, 2);
  const std::vector<Index> partial = {0, 1};
  const auto r = m.recommend(partial, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].citation, 2u);
  EXPECT_DOUBLE_EQ(r[0].score, 1.0);
}

TEST(CfRecommend, FullCoverageLeavesNothing) {
  const auto vocab = plain_vocab(3);
  const auto m = CfModel::build({cite_doc("d1", {0, 1, 2})}, vocab);
  const std::vector<Index> all = {0, 1, 2};
  EXPECT_TRUE(m.recommend(all, 10).empty());
}

TEST(CfRecommend, SingleEffectiveNeighbor) {
  const auto vocab = plain_vocab(6);
  const std::vector<Document> train = {cite_doc("d1", {0, 1, 2}), cite_doc("d2", {3, 4}),
                                       cite_doc("d3", {4, 5})};
  const auto m = CfModel::build(train, vocab, Scheme::Binary, 3);
  const std::vector<Index> partial = {0};
  const auto r = m.recommend(partial, 10);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].citation, 1u);
  EXPECT_EQ(r[1].citation, 2u);
  EXPECT_DOUBLE_EQ(r[0].score, 1.0);
  EXPECT_DOUBLE_EQ(r[1].score, 1.0);
}

TEST(CfRecommend, ColdStartIsEmpty) {
  const auto vocab = plain_vocab(4);
  const auto m = CfModel::build({cite_doc("d1", {0, 1})}, vocab);
  EXPECT_TRUE(m.recommend(std::vector<Index>{3}, 5).empty());
  EXPECT_TRUE(m.recommend(std::vector<Index>{}, 5).empty());
  EXPECT_TRUE(m.recommend(std::vector<Index>{vocab.unk_index()}, 5).empty());
}

TEST(CfRecommend, UnkNeverRecommended) {
  const auto vocab = plain_vocab(3);
  const Index unk = vocab.unk_index();
  const auto m = CfModel::build({cite_doc("d1", {0, unk, 1})}, vocab);
  const auto r = m.recommend(std::vector<Index>{0}, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].citation, 1u);
}

TEST(CfRecommend, ExcludeDocIsLeaveOneOut) {
  const auto vocab = plain_vocab(4);
  const std::vector<Document> train = {cite_doc("a", {0, 1}), cite_doc("b", {0, 2})};
  const auto m = CfModel::build(train, vocab);
  const auto r = m.recommend(std::vector<Index>{0}, 10, "a");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].citation, 2u);
}

TEST(CfRecommend, NeighborTieBrokenByDocId) {
  const auto vocab = plain_vocab(4);
  // Both neighbors have equal similarity; K=1 keeps the smaller id "a".
  const std::vector<Document> train = {cite_doc("b", {0, 2}), cite_doc("a", {0, 1})};
  const auto m = CfModel::build(train, vocab, Scheme::Binary, 1);
  const auto r = m.recommend(std::vector<Index>{0}, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].citation, 1u);
}

TEST(CfRecommend, DuplicatesInPartialDoNotMatterUnderBinary) {
  const auto vocab = plain_vocab(10);
  Rng rng(17);
  std::vector<Document> train;
  for (int d = 0; d < 30; ++d) {
    std::vector<Index> cites;
    for (int i = 0; i < 4; ++i) cites.push_back(static_cast<Index>(rng.below(10)));
    train.push_back(cite_doc("d" + std::to_string(d), cites));
  }
  const auto m = CfModel::build(train, vocab, Scheme::Binary, 5);
  for (Index a = 0; a < 10; ++a) {
    const std::vector<Index> once = {a, (a + 3) % 10};
    const std::vector<Index> twice = {a, a, (a + 3) % 10, a};
    EXPECT_EQ(m.recommend(once, 10).items().size(), m.recommend(twice, 10).items().size());
    const auto r1 = m.recommend(once, 10), r2 = m.recommend(twice, 10);
    for (std::size_t i = 0; i < r1.size(); ++i) {
      EXPECT_EQ(r1[i].citation, r2[i].citation);
      EXPECT_EQ(r1[i].score, r2[i].score);
      EXPECT_GE(r1[i].score, 0.0);
      EXPECT_LE(r1[i].score, 1.0);
    }
  }
}

TEST(CfRecommend, MatchesOracleOnRandomCorpora) {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t v = 3 + rng.below(20);
    const auto vocab = plain_vocab(v);
    const int scheme = static_cast<int>(rng.below(3));
    const std::size_t k = 1 + rng.below(12);
    std::vector<Document> train;
    oracle::CfCorpus oc;
    oc.dims = vocab.size();
    oc.unk = vocab.unk_index();
    for (std::size_t d = 0; d < 5 + rng.below(40); ++d) {
      std::vector<Index> cites;
      std::vector<unsigned> kept;
      for (std::size_t i = 0; i < 1 + rng.below(8); ++i) {
        const auto c = static_cast<Index>(rng.below(vocab.size()));
        cites.push_back(c);
        if (c != vocab.unk_index()) kept.push_back(c);
      }
      const std::string id = "doc" + std::to_string(rng.below(1000)) + "_" + std::to_string(d);
      train.push_back(cite_doc(id, cites));
      oc.ids.push_back(id);
      oc.cites.push_back(kept);
    }
    const auto m = CfModel::build(train, vocab, static_cast<Scheme>(scheme), k);
    for (int q = 0; q < 10; ++q) {
      std::vector<Index> partial;
      for (std::size_t i = 0; i < 1 + rng.below(4); ++i) {
        partial.push_back(static_cast<Index>(rng.below(vocab.size())));
      }
      const auto got = m.recommend(partial, std::numeric_limits<std::size_t>::max());
      const auto want = oracle::cf_scores(oc, {partial.begin(), partial.end()}, scheme, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got[i].citation, want[i].citation);
        EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
      }
    }
  }
}

TEST(CfModel, SaveLoadRoundTrip) {
  const auto vocab = plain_vocab(5);
  const std::vector<Document> train = {cite_doc("a", {0, 1, 1}), cite_doc("b", {1, 2, 4}),
                                       cite_doc("c", {3})};
  const auto m = CfModel::build(train, vocab, Scheme::TfIdf, 7);
  std::stringstream io;
  m.save(io);
  const std::string first = io.str();
  const auto back = CfModel::load(io);
  EXPECT_EQ(back.scheme(), Scheme::TfIdf);
  EXPECT_EQ(back.k(), 7u);
  EXPECT_EQ(back.doc_ids(), m.doc_ids());
  std::ostringstream again;
  back.save(again);
  EXPECT_EQ(again.str(), first);
  const std::vector<Index> q = {1};
  const auto r1 = m.recommend(q, 5), r2 = back.recommend(q, 5);
  ASSERT_EQ(r1.size(), r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) EXPECT_EQ(r1[i].score, r2[i].score);
}

TEST(CfModel, BadMagicRejected) {
  std::istringstream in(R"({"magic":"other","version":1})");
  EXPECT_THROW(CfModel::load(in), FormatError);
}
