#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "citerec/eval.hpp"

using namespace citerec;

namespace {

RankedList list_of(std::vector<Index> order) {
  std::vector<Ranked> items;
  for (std::size_t i = 0; i < order.size(); ++i) {
    items.push_back({order[i], static_cast<double>(order.size() - i)});
  }
  return RankedList::from_scores(std::move(items), order.size());
}

CitationVocabulary vocab_n(std::size_t n) {
  std::vector<VocabEntry> e;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = i % 2 ? CitationClass::Statute : CitationClass::Case;
    e.push_back({{cls, "K" + std::to_string(100 + i)}, 50 - i});
  }
  e.push_back({NormalizedCitation::unknown(), 0});
  return CitationVocabulary(std::move(e));
}

Document cites_doc(std::string id, std::vector<Index> cites, int year = 2000) {
  Document d{std::move(id), {}, {year, 0, 0}};
  for (Index c : cites) {
    d.tokens.push_back(Token::word("w"));
    d.tokens.push_back(Token::cite(c));
  }
  return d;
}

EvalInstance inst(std::size_t fold, std::size_t rank, CitationClass cls = CitationClass::Case,
                  int year = 2000, std::size_t distance = 0, Index target = 0) {
  EvalInstance i;
  i.fold = fold;
  i.rank = rank;
  i.cls = cls;
  i.year = year;
  i.distance = distance;
  i.target = target;
  return i;
}

}  // namespace

TEST(RecallAtK, Examples) {
  const auto r = list_of({4, 1, 2, 3, 5, 9, 7});
  EXPECT_EQ(recall_at_k(r, 4, 1), 1);
  EXPECT_EQ(recall_at_k(r, 8, 20), 0);
  EXPECT_EQ(recall_at_k(r, 9, 5), 0);
  EXPECT_EQ(recall_at_k(r, 9, 20), 1);
  EXPECT_EQ(recall_at_k(RankedList{}, 9, 20), 0);
}

TEST(FoldStats, Examples) {
  const std::vector<double> same(6, 0.5);
  const auto s = fold_stats(same);
  EXPECT_EQ(s.mean, 0.5);
  EXPECT_EQ(s.std_error, 0.0);
  const auto two = fold_stats(std::vector<double>{0.0, 1.0});
  EXPECT_NEAR(two.mean, 0.5, 1e-12);
  EXPECT_NEAR(two.std_error, 0.5, 1e-12);
  const auto a = fold_stats(std::vector<double>{0.1, 0.4, 0.3, 0.9});
  const auto b = fold_stats(std::vector<double>{0.9, 0.3, 0.1, 0.4});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_THROW(fold_stats(std::vector<double>{}), InvalidArgument);
}

TEST(Report, FoldMeanVersusInstanceMean) {
  // fold 0: 1 of 1 hit; fold 1: 1 of 3 hits
  const std::vector<EvalInstance> xs = {inst(0, 0), inst(1, 0), inst(1, 7), inst(1, kNotRanked)};
  const std::vector<std::size_t> ks = {1, 5, 20};
  const auto r = make_report(xs, ks, 2, "citation-list", "cf");
  ASSERT_EQ(r.recall.size(), 3u);
  EXPECT_NEAR(*r.recall[0].per_fold[1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(r.recall[0].fold_mean, (1.0 + 1.0 / 3) / 2, 1e-15);
  EXPECT_NEAR(r.recall[0].instance_mean, 0.5, 1e-15);
  EXPECT_NEAR(r.recall[2].instance_mean, 0.75, 1e-15);
  for (std::size_t f = 0; f < 2; ++f) {
    EXPECT_LE(*r.recall[0].per_fold[f], *r.recall[1].per_fold[f]);
    EXPECT_LE(*r.recall[1].per_fold[f], *r.recall[2].per_fold[f]);
  }
}

TEST(Report, EmptyFoldIsNull) {
  const std::vector<EvalInstance> xs = {inst(0, 0), inst(2, 3)};
  const std::vector<std::size_t> ks = {1};
  const auto r = make_report(xs, ks, 3, "context", "majority");
  EXPECT_FALSE(r.recall[0].per_fold[1].has_value());
  EXPECT_TRUE(to_json(r)["recall"][0]["per_fold"][1].is_null());
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_EQ(csv.str(), "k,fold_mean,fold_stderr,instance_mean,fold_0,fold_1,fold_2\n1,0.5,0.5,0.5,1,,0\n");
}

TEST(CitationListProtocol, InstancesPerDocument) {
  const auto vocab = vocab_n(6);
  EvalContext ctx{&vocab, {{"one", 0}, {"three", 1}}, 2};
  std::vector<std::vector<Index>> seen;
  const ListRecommender model = [&](std::span<const Index> partial, const Document&) {
    seen.emplace_back(partial.begin(), partial.end());
    return RankedList{};
  };
  const auto xs = evaluate_citation_list(model, {cites_doc("one", {1}), cites_doc("three", {1, 2, 3})}, ctx);
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_EQ(seen, (std::vector<std::vector<Index>>{{1}, {1, 2}}));
  EXPECT_EQ(xs[0].target, 2u);
  EXPECT_EQ(xs[1].target, 3u);
  EXPECT_EQ(xs[1].fold, 1u);
  EXPECT_EQ(xs[1].cls, CitationClass::Statute);
  EXPECT_EQ(xs[1].target_count, 47u);
}

TEST(CitationListProtocol, OracleModelAndUnkTargets) {
  const auto vocab = vocab_n(6);
  const Index unk = vocab.unk_index();
  const std::vector<Document> docs = {cites_doc("a", {0, 1, unk, 2, 3}), cites_doc("b", {5, 4})};
  EvalContext ctx{&vocab, {{"a", 0}, {"b", 1}}, 2};
  const ListRecommender perfect = [&](std::span<const Index> partial, const Document& d) {
    const auto seq = citation_sequence(d);
    return list_of({seq[partial.size()], 99});
  };
  const auto xs = evaluate_citation_list(perfect, docs, ctx);
  EXPECT_EQ(xs.size(), 4u);  // the UNK target is skipped
  const std::vector<std::size_t> ks = {1};
  EXPECT_EQ(make_report(xs, ks, 2, "", "").recall[0].instance_mean, 1.0);
  EXPECT_EQ(evaluate_citation_list(perfect, docs, ctx, 1).size(), 2u);
}

TEST(ContextProtocol, PerfectModelAndDistances) {
  const auto vocab = vocab_n(6);
  std::vector<Document> docs;
  EvalContext ctx{&vocab, {}, 6};
  for (int i = 0; i < 12; ++i) {
    docs.push_back(cites_doc("d" + std::to_string(i), {static_cast<Index>(i % 6), 2}));
    ctx.fold_of[docs.back().id] = static_cast<std::size_t>(i % 6);
  }
  const ContextRecommender perfect = [&](std::span<const Token> context, const Document& d) {
    // the target is the first citation at or after the context end
    for (std::size_t p = context.size(); p < d.tokens.size(); ++p) {
      if (d.tokens[p].is_cite()) return list_of({d.tokens[p].citation()});
    }
    return RankedList{};
  };
  ContextEvalOptions opts;
  opts.spec = {50, 3};
  opts.seed = 4;
  const auto xs = evaluate_context(perfect, docs, ctx, opts);
  EXPECT_EQ(xs.size(), 12u);
  const std::vector<std::size_t> ks = {1, 5, 20};
  const auto r = make_report(xs, ks, 6, "context", "oracle");
  for (const auto& rk : r.recall) EXPECT_EQ(rk.fold_mean, 1.0);
  for (const auto& x : xs) {
    EXPECT_GE(x.distance, 1u);
    EXPECT_LE(x.distance, 3u);
  }
  opts.exhaustive = true;
  opts.spec = {50, 1};
  EXPECT_EQ(evaluate_context(perfect, docs, ctx, opts).size(), 24u);
}

TEST(ContextProtocol, MajorityOnUniformTargets) {
  // 100 equally frequent citations, targets uniform: recall@20 is about 0.20
  const auto vocab = vocab_n(100);
  std::vector<std::uint64_t> counts(vocab.size(), 10);
  counts[vocab.unk_index()] = 0;
  Rng rng(1234);
  std::vector<Document> docs;
  EvalContext ctx{&vocab, {}, 6};
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    docs.push_back(cites_doc("d" + std::to_string(i), {static_cast<Index>(rng.below(100))}));
    ctx.fold_of[docs.back().id] = static_cast<std::size_t>(i % 6);
  }
  const ContextRecommender majority = [&](std::span<const Token>, const Document&) {
    std::vector<Ranked> all;
    for (Index c = 0; c < 100; ++c) all.push_back({c, 10.0});
    return RankedList::from_scores(std::move(all), 20);
  };
  ContextEvalOptions opts;
  opts.spec = {50, 1};
  const auto xs = evaluate_context(majority, docs, ctx, opts);
  ASSERT_EQ(xs.size(), static_cast<std::size_t>(n));
  const std::vector<std::size_t> ks = {20};
  const double r20 = make_report(xs, ks, 6, "", "").recall[0].instance_mean;
  EXPECT_NEAR(r20, 0.20, 3 * std::sqrt(0.2 * 0.8 / n));
}

TEST(DistanceBins, ForecastLength128) {
  const auto bins = distance_bins(128);
  ASSERT_EQ(bins.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(bins[i].first, 16 * i + 1);
    EXPECT_EQ(bins[i].second, 16 * i + 16);
  }
  EXPECT_EQ(distance_bins(20), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 16}, {17, 20}}));
  EXPECT_TRUE(distance_bins(0).empty());
}

TEST(Breakdowns, SingleClassAndHandCounts) {
  // six instances: years 2001 x3 (2 hits@1), 2002 x3 (0 hits@1, 1 hit@5)
  const std::vector<EvalInstance> xs = {
      inst(0, 0, CitationClass::Case, 2001, 1, 3), inst(1, 0, CitationClass::Case, 2001, 17, 3),
      inst(2, 9, CitationClass::Case, 2001, 40, 4), inst(3, 2, CitationClass::Case, 2002, 2, 4),
      inst(4, kNotRanked, CitationClass::Case, 2002, 16, 5),
      inst(5, 30, CitationClass::Case, 2002, 33, 5)};
  const std::vector<std::size_t> ks = {1, 5};
  const auto b = breakdowns(xs, ks, 128);
  ASSERT_EQ(b.by_class.rows.size(), 1u);
  EXPECT_EQ(b.by_class.rows[0], (std::vector<std::string>{"case", "6", "0.3333333333", "0.5"}));
  ASSERT_EQ(b.by_year.rows.size(), 2u);
  EXPECT_EQ(b.by_year.rows[0], (std::vector<std::string>{"2001", "3", "0.6666666667", "0.6666666667"}));
  EXPECT_EQ(b.by_year.rows[1], (std::vector<std::string>{"2002", "3", "0", "0.3333333333"}));
  // bins 1-16 (3 instances), 17-32 (1), 33-48 (2); empty bins omitted
  ASSERT_EQ(b.by_distance.rows.size(), 3u);
  EXPECT_EQ(b.by_distance.rows[0], (std::vector<std::string>{"1", "16", "3", "0.3333333333", "0.6666666667"}));
  EXPECT_EQ(b.by_distance.rows[2][0], "33");
  ASSERT_EQ(b.per_citation.rows.size(), 3u);
  EXPECT_EQ(b.per_citation.rows[0][0], "3");
  EXPECT_EQ(b.per_citation.rows[0][4], "1");
  std::ostringstream out;
  b.by_year.write_csv(out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "year,n,recall@1,recall@5");
}

TEST(Breakdowns, CitationListHasNoDistanceRows) {
  const std::vector<EvalInstance> xs = {inst(0, 0), inst(0, 1)};
  const std::vector<std::size_t> ks = {1};
  EXPECT_TRUE(breakdowns(xs, ks, 0).by_distance.rows.empty());
}
