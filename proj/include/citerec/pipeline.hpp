#pragma once

// End-to-end wiring of the modules: vocabulary from the training split,
// model construction, metadata fusion training and evaluation. The CLI adds
// file I/O around these functions.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citerec/cf.hpp"
#include "citerec/citeparse.hpp"
#include "citerec/context.hpp"
#include "citerec/corpus.hpp"
#include "citerec/eval.hpp"
#include "citerec/fusion.hpp"
#include "citerec/windows.hpp"

namespace citerec {

enum class ModelKind { Cf, Context, Majority };
enum class Protocol { CitationList, Context };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Cf: return "cf";
    case ModelKind::Context: return "context";
    case ModelKind::Majority: break;
  }
  return "majority";
}

inline ModelKind model_kind_from_string(std::string_view s) {
  if (s == "cf") return ModelKind::Cf;
  if (s == "context") return ModelKind::Context;
  if (s == "majority") return ModelKind::Majority;
  throw InvalidArgument("unknown model '" + std::string(s) + "' (cf|context|majority)");
}

inline std::string_view to_string(Protocol p) {
  return p == Protocol::CitationList ? "citation-list" : "context";
}

inline Protocol protocol_from_string(std::string_view s) {
  if (s == "citation-list") return Protocol::CitationList;
  if (s == "context") return Protocol::Context;
  throw InvalidArgument("unknown protocol '" + std::string(s) + "' (citation-list|context)");
}

inline Protocol default_protocol(ModelKind m) {
  return m == ModelKind::Cf ? Protocol::CitationList : Protocol::Context;
}

struct PipelineConfig {
  SplitRatios ratios;
  std::uint64_t seed = 42;
  std::uint64_t min_count = 20;
  // collaborative filtering
  Scheme scheme = Scheme::Binary;
  std::size_t k = 50;
  // text similarity
  TextVocabOptions text;
  std::size_t context_len = 50;
  std::size_t cap = 100;
  // fusion
  FeatureSet features;
  double alpha = 1.0;
  std::size_t fusion_docs = 1000;
  std::size_t fusion_pool = 50;
  SvmOptions svm;
  // evaluation
  std::vector<std::size_t> ks = {1, 5, 20};
  std::size_t top_n = 20;
  std::size_t max_prefixes = 0;
  std::size_t forecast_len = 1;
  std::size_t eval_passes = 1;
  bool exhaustive = false;
  // window export
  WindowSpec export_spec{256, 128};

  BankOptions bank_options() const { return {context_len, cap, seed}; }

  void validate() const {
    if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
    if (k < 1) throw InvalidArgument("K must be >= 1");
    if (context_len < 1 || forecast_len < 1) throw InvalidArgument("window lengths must be >= 1");
    if (cap < 1) throw InvalidArgument("cap must be >= 1");
    if (top_n < 1) throw InvalidArgument("top_n must be >= 1");
    if (fusion_pool < 1) throw InvalidArgument("fusion_pool must be >= 1");
    if (ks.empty()) throw InvalidArgument("at least one k is required");
    for (auto k_ : ks) {
      if (k_ < 1) throw InvalidArgument("every k must be >= 1");
    }
    if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
    if (!(svm.c > 0.0)) throw InvalidArgument("svm C must be > 0");
    export_spec.validate();
  }
};

// Documents with the given ids, in id-list order.
template <typename Doc>
std::vector<Doc> select_documents(const std::vector<Doc>& all, const std::vector<std::string>& ids) {
  std::unordered_map<std::string_view, const Doc*> by_id;
  for (const auto& d : all) by_id.emplace(d.id, &d);
  std::vector<Doc> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidArgument("document '" + id + "' not in corpus");
    out.push_back(*it->second);
  }
  return out;
}

inline CitationVocabulary vocabulary_from_training(const std::vector<NormalizedDocument>& docs,
                                                   const std::vector<std::string>& train_ids,
                                                   std::uint64_t min_count) {
  std::vector<NormalizedCitation> stream;
  for (const auto& d : select_documents(docs, train_ids)) {
    for (const auto& t : d.tokens) {
      if (t.is_cite) stream.push_back(t.citation);
    }
  }
  return build_vocabulary(stream, min_count);
}

inline std::vector<Document> index_documents(const std::vector<NormalizedDocument>& docs,
                                             const CitationVocabulary& vocab) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(index_document(d, vocab));
  return out;
}

// Borrowed views of whatever artifacts a command has loaded.
struct Models {
  const CitationVocabulary* vocab = nullptr;
  const CfModel* cf = nullptr;
  const TextVocabulary* text_vocab = nullptr;
  const ContextBank* bank = nullptr;
  const FeatureScoreTable* table = nullptr;
  const FusionWeights* fusion = nullptr;

  void require(ModelKind m, bool with_fusion) const {
    if (!vocab) throw InvalidArgument("citation vocabulary not loaded");
    if (m == ModelKind::Cf && !cf) throw InvalidArgument("cf model not loaded");
    if (m == ModelKind::Context && !(text_vocab && bank)) {
      throw InvalidArgument("context model not loaded");
    }
    if (with_fusion && !(table && fusion)) throw InvalidArgument("fusion weights not loaded");
  }
};

inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

namespace detail {
inline RankedList apply_fusion(const Models& m, const FeatureSet& features, const RankedList& base,
                               const Metadata& meta, std::size_t top_n) {
  std::vector<std::vector<double>> rows;
  rows.reserve(base.size());
  for (const auto& item : base.items()) {
    rows.push_back(metadata_row(*m.table, features, meta, item.citation));
  }
  return fuse(base, rows, *m.fusion, top_n);
}
}  // namespace detail

struct RecommendOptions {
  std::size_t top_n = 20;
  bool fusion = false;
  std::size_t fusion_pool = 50;
  FeatureSet features;
  bool leave_one_out = false;  // exclude the query document's own training data
};

inline ListRecommender list_recommender(const Models& m, ModelKind kind, RecommendOptions opts) {
  m.require(kind, opts.fusion);
  if (kind == ModelKind::Context) {
    throw InvalidArgument("the context model does not take citation lists");
  }
  return [&m, kind, opts](std::span<const Index> partial, const Document& doc) {
    const std::size_t n = opts.fusion ? std::max(opts.fusion_pool, opts.top_n) : opts.top_n;
    RankedList base;
    if (kind == ModelKind::Cf) {
      base = m.cf->recommend(partial, n, opts.leave_one_out ? std::string_view(doc.id) : "");
    } else {
      base = majority_recommend(m.vocab->counts(), m.vocab->unk_index(), n);
    }
    if (!opts.fusion) return base;
    return detail::apply_fusion(m, opts.features, base, doc.metadata, opts.top_n);
  };
}

inline ContextRecommender context_recommender(const Models& m, ModelKind kind,
                                              RecommendOptions opts) {
  m.require(kind, opts.fusion);
  if (kind == ModelKind::Cf) throw InvalidArgument("the cf model does not take text contexts");
  return [&m, kind, opts](std::span<const Token> context, const Document& doc) {
    const std::size_t n = opts.fusion ? std::max(opts.fusion_pool, opts.top_n) : opts.top_n;
    RankedList base;
    if (kind == ModelKind::Context) {
      base = m.bank->recommend(context, *m.text_vocab, n,
                               opts.leave_one_out ? std::string_view(doc.id) : "");
    } else {
      base = majority_recommend(m.vocab->counts(), m.vocab->unk_index(), n);
    }
    if (!opts.fusion) return base;
    return detail::apply_fusion(m, opts.features, base, doc.metadata, opts.top_n);
  };
}

// Deterministic sample of n training documents.
inline std::vector<const Document*> sample_documents(const std::vector<Document>& docs,
                                                     std::size_t n, std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, const Document*>> keyed;
  for (const auto& d : docs) keyed.emplace_back(mix_seed(mix_seed(seed, "fusion"), d.id), &d);
  std::ranges::sort(keyed, [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->id < b.second->id;
  });
  if (keyed.size() > n) keyed.resize(n);
  std::vector<const Document*> out;
  for (const auto& [key, d] : keyed) out.push_back(d);
  return out;
}

// Ranking instances for every citation occurrence in a sample of training
// documents: the true citation against the top fusion_pool wrong candidates
// of the base recommender (queried leave-one-out).
inline std::vector<RankingInstance> fusion_instances(const Models& m, ModelKind kind,
                                                     const std::vector<Document>& train,
                                                     const PipelineConfig& cfg) {
  m.require(kind, false);
  if (!m.table) throw InvalidArgument("feature score table required");
  std::vector<RankingInstance> out;
  const Index unk = m.vocab->unk_index();

  auto emit = [&](const RankedList& base, Index target, const Metadata& meta) {
    RankingInstance inst;
    double target_score = 0.0;
    for (const auto& item : base.items()) {
      if (item.citation == target) {
        target_score = item.score;
        continue;
      }
      if (inst.negatives.size() >= cfg.fusion_pool) continue;
      auto row = metadata_row(*m.table, cfg.features, meta, item.citation);
      row.insert(row.begin(), item.score);
      inst.negatives.push_back(std::move(row));
    }
    inst.positive = metadata_row(*m.table, cfg.features, meta, target);
    inst.positive.insert(inst.positive.begin(), target_score);
    out.push_back(std::move(inst));
  };

  for (const Document* doc : sample_documents(train, cfg.fusion_docs, cfg.seed)) {
    if (kind == ModelKind::Context) {
      const std::span<const Token> toks = doc->tokens;
      for (std::size_t p = 0; p < toks.size(); ++p) {
        if (!toks[p].is_cite() || toks[p].citation() == unk) continue;
        const auto window = preceding_window(toks, p, cfg.context_len);
        emit(m.bank->recommend(window, *m.text_vocab, kAll, doc->id), toks[p].citation(),
             doc->metadata);
      }
    } else {
      const auto seq = citation_sequence(*doc);
      for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i] == unk) continue;
        const auto prefix = std::span<const Index>(seq).first(i);
        const auto base = kind == ModelKind::Cf
                              ? m.cf->recommend(prefix, kAll, doc->id)
                              : majority_recommend(m.vocab->counts(), unk, kAll);
        emit(base, seq[i], doc->metadata);
      }
    }
  }
  return out;
}

inline FusionWeights train_fusion(const Models& m, ModelKind kind, const std::vector<Document>& train,
                                  const PipelineConfig& cfg) {
  const auto data = pairwise_transform(fusion_instances(m, kind, train, cfg));
  return train_linear_svm(data, cfg.svm, cfg.features.column_names());
}

struct Evaluation {
  std::vector<EvalInstance> instances;
  RecallReport report;
  Breakdowns tables;
};

inline Evaluation evaluate(const Models& m, ModelKind kind, Protocol protocol,
                           const std::vector<Document>& test, const CorpusSplit& split,
                           const PipelineConfig& cfg, bool fusion = false) {
  EvalContext ctx;
  ctx.vocab = m.vocab;
  ctx.fold_of = split.fold_of();
  ctx.folds = split.test_folds.size();
  RecommendOptions ropts;
  ropts.top_n = std::max(cfg.top_n, *std::ranges::max_element(cfg.ks));
  ropts.fusion = fusion;
  ropts.fusion_pool = cfg.fusion_pool;
  ropts.features = cfg.features;

  Evaluation ev;
  std::size_t forecast = 0;
  if (protocol == Protocol::CitationList) {
    ev.instances =
        evaluate_citation_list(list_recommender(m, kind, ropts), test, ctx, cfg.max_prefixes);
  } else {
    ContextEvalOptions copts;
    copts.spec = {cfg.context_len, cfg.forecast_len};
    copts.seed = cfg.seed;
    copts.passes = cfg.eval_passes;
    copts.exhaustive = cfg.exhaustive;
    ev.instances = evaluate_context(context_recommender(m, kind, ropts), test, ctx, copts);
    forecast = cfg.forecast_len;
  }
  std::string name(to_string(kind));
  if (fusion) name += "+fusion";
  ev.report = make_report(ev.instances, cfg.ks, ctx.folds, std::string(to_string(protocol)), name);
  ev.tables = breakdowns(ev.instances, cfg.ks, forecast);
  return ev;
}

}  // namespace citerec
