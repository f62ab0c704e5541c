#pragma once

// Recall@k evaluation.
//
// Citation-list protocol: for a test document with citations c_1..c_M,
// every prefix c_1..c_m (1 <= m < M) is a query and c_{m+1} the target.
// Context protocol: window instances (see windows.hpp) supply a context and
// the first citation of the forecast window as target.
// UNK targets are skipped in both. Recall is reported per test fold, as the
// mean and standard error over folds, and as the instance-weighted mean.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "citerec/citeparse.hpp"
#include "citerec/corpus.hpp"
#include "citerec/csv.hpp"
#include "citerec/error.hpp"
#include "citerec/ranked_list.hpp"
#include "citerec/windows.hpp"
#include "json.hpp"

namespace citerec {

inline constexpr std::size_t kNotRanked = std::numeric_limits<std::size_t>::max();

// 1 iff target is among the first min(k, |ranked|) items.
inline int recall_at_k(const RankedList& ranked, Index target, std::size_t k) {
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i].citation == target) return 1;
  }
  return 0;
}

// One scored prediction. rank is the 0-based position of the target in the
// model's list (kNotRanked when absent), so recall at any k follows from it.
struct EvalInstance {
  std::string doc_id;
  Index target = 0;
  std::size_t rank = kNotRanked;
  std::size_t fold = 0;
  CitationClass cls = CitationClass::Unknown;
  int year = 0;
  std::size_t distance = 0;  // 0 under the citation-list protocol
  std::uint64_t target_count = 0;

  int hit(std::size_t k) const { return rank < k ? 1 : 0; }
};

struct FoldStats {
  double mean = 0.0;
  double std_error = 0.0;
};

// Arithmetic mean and sample standard deviation (n-1) over sqrt(n). A single
// value has standard error 0.
inline FoldStats fold_stats(std::span<const double> per_fold) {
  if (per_fold.empty()) throw InvalidArgument("fold_stats: no values");
  const double n = static_cast<double>(per_fold.size());
  double sum = 0.0;
  for (double v : per_fold) sum += v;
  const double mean = sum / n;
  if (per_fold.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : per_fold) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

struct RecallAtK {
  std::size_t k = 0;
  std::vector<std::optional<double>> per_fold;  // nullopt for a fold without instances
  double fold_mean = 0.0;
  double fold_stderr = 0.0;
  double instance_mean = 0.0;
};

struct RecallReport {
  std::string protocol;
  std::string model;
  std::vector<std::size_t> fold_instances;
  std::size_t instances = 0;
  std::vector<RecallAtK> recall;
};

inline RecallReport make_report(std::span<const EvalInstance> instances,
                                std::span<const std::size_t> ks, std::size_t folds,
                                std::string protocol, std::string model) {
  RecallReport r;
  r.protocol = std::move(protocol);
  r.model = std::move(model);
  r.instances = instances.size();
  r.fold_instances.assign(folds, 0);
  for (const auto& inst : instances) {
    if (inst.fold >= folds) throw InvalidArgument("eval: fold id out of range");
    ++r.fold_instances[inst.fold];
  }
  for (std::size_t k : ks) {
    RecallAtK rk;
    rk.k = k;
    std::vector<std::size_t> hits(folds, 0);
    std::size_t total_hits = 0;
    for (const auto& inst : instances) {
      hits[inst.fold] += inst.hit(k);
      total_hits += inst.hit(k);
    }
    std::vector<double> present;
    for (std::size_t f = 0; f < folds; ++f) {
      if (r.fold_instances[f] == 0) {
        rk.per_fold.emplace_back();
      } else {
        const double v = static_cast<double>(hits[f]) / static_cast<double>(r.fold_instances[f]);
        rk.per_fold.emplace_back(v);
        present.push_back(v);
      }
    }
    if (!present.empty()) {
      const auto s = fold_stats(present);
      rk.fold_mean = s.mean;
      rk.fold_stderr = s.std_error;
      rk.instance_mean = static_cast<double>(total_hits) / static_cast<double>(instances.size());
    }
    r.recall.push_back(std::move(rk));
  }
  return r;
}

inline nlohmann::ordered_json to_json(const RecallReport& r) {
  nlohmann::ordered_json j;
  j["protocol"] = r.protocol;
  j["model"] = r.model;
  j["instances"] = r.instances;
  j["fold_instances"] = r.fold_instances;
  auto& rec = j["recall"] = nlohmann::ordered_json::array();
  for (const auto& rk : r.recall) {
    nlohmann::ordered_json e;
    e["k"] = rk.k;
    auto& pf = e["per_fold"] = nlohmann::ordered_json::array();
    for (const auto& v : rk.per_fold) {
      if (v) {
        pf.push_back(*v);
      } else {
        pf.push_back(nullptr);
      }
    }
    e["fold_mean"] = rk.fold_mean;
    e["fold_stderr"] = rk.fold_stderr;
    e["instance_mean"] = rk.instance_mean;
    rec.push_back(std::move(e));
  }
  return j;
}

// CSV: k,fold_mean,fold_stderr,instance_mean,fold_0..fold_{F-1}
inline void write_report_csv(std::ostream& out, const RecallReport& r) {
  std::vector<std::string> header = {"k", "fold_mean", "fold_stderr", "instance_mean"};
  const std::size_t folds = r.fold_instances.size();
  for (std::size_t f = 0; f < folds; ++f) header.push_back("fold_" + std::to_string(f));
  csv::write_record(out, header);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& rk : r.recall) {
    std::vector<std::string> row = {std::to_string(rk.k), num(rk.fold_mean), num(rk.fold_stderr),
                                    num(rk.instance_mean)};
    for (const auto& v : rk.per_fold) row.push_back(v ? num(*v) : "");
    csv::write_record(out, row);
  }
}

struct EvalContext {
  const CitationVocabulary* vocab = nullptr;
  std::unordered_map<std::string, std::size_t> fold_of;  // test doc id -> fold
  std::size_t folds = kTestFolds;
};

namespace detail {
inline EvalInstance make_instance(const EvalContext& ctx, const Document& doc, Index target,
                                  const RankedList& ranked, std::size_t distance) {
  EvalInstance inst;
  inst.doc_id = doc.id;
  inst.target = target;
  inst.rank = ranked.position_of(target);
  if (inst.rank >= ranked.size()) inst.rank = kNotRanked;
  const auto f = ctx.fold_of.find(doc.id);
  if (f == ctx.fold_of.end()) throw InvalidArgument("eval: document '" + doc.id + "' has no fold");
  inst.fold = f->second;
  inst.year = doc.metadata.year;
  inst.distance = distance;
  if (ctx.vocab) {
    const auto& entry = (*ctx.vocab)[target];
    inst.cls = entry.citation.cls;
    inst.target_count = entry.count;
  }
  return inst;
}
}  // namespace detail

using ListRecommender =
    std::function<RankedList(std::span<const Index> partial, const Document& doc)>;
using ContextRecommender =
    std::function<RankedList(std::span<const Token> context, const Document& doc)>;

// Every prefix of every test document's citation sequence. max_per_doc caps
// the prefixes taken from one document (0 = no cap).
inline std::vector<EvalInstance> evaluate_citation_list(const ListRecommender& model,
                                                        const std::vector<Document>& docs,
                                                        const EvalContext& ctx,
                                                        std::size_t max_per_doc = 0) {
  if (!ctx.vocab) throw InvalidArgument("eval: vocabulary required");
  std::vector<EvalInstance> out;
  for (const auto& doc : docs) {
    const auto seq = citation_sequence(doc);
    std::size_t taken = 0;
    for (std::size_t m = 1; m < seq.size(); ++m) {
      if (max_per_doc && taken >= max_per_doc) break;
      const Index target = seq[m];
      if (target == ctx.vocab->unk_index()) continue;
      const auto ranked = model(std::span<const Index>(seq).first(m), doc);
      out.push_back(detail::make_instance(ctx, doc, target, ranked, 0));
      ++taken;
    }
  }
  return out;
}

struct ContextEvalOptions {
  WindowSpec spec{50, 1};
  std::uint64_t seed = 0;
  std::size_t passes = 1;    // sampled instances per document
  bool exhaustive = false;   // every valid offset instead of sampling
};

inline std::vector<EvalInstance> evaluate_context(const ContextRecommender& model,
                                                  const std::vector<Document>& docs,
                                                  const EvalContext& ctx,
                                                  const ContextEvalOptions& opts) {
  if (!ctx.vocab) throw InvalidArgument("eval: vocabulary required");
  const Index unk = ctx.vocab->unk_index();
  std::vector<EvalInstance> out;
  auto score = [&](const Document& doc, const WindowInstance& w) {
    const auto ranked = model(w.context, doc);
    out.push_back(detail::make_instance(ctx, doc, w.target, ranked, w.distance));
  };
  for (const auto& doc : docs) {
    if (opts.exhaustive) {
      for (std::size_t o : valid_offsets(doc, opts.spec, unk)) {
        score(doc, *instance_at(doc, opts.spec, unk, o));
      }
      continue;
    }
    for (std::size_t e = 0; e < opts.passes; ++e) {
      auto rng = instance_rng(opts.seed, doc.id, e);
      if (const auto w = sample_instance(doc, opts.spec, unk, rng)) score(doc, *w);
    }
  }
  return out;
}

// Bins of the given width over [1, w]; the last bin is clipped to w.
inline std::vector<std::pair<std::size_t, std::size_t>> distance_bins(std::size_t w,
                                                                      std::size_t width = 16) {
  if (width == 0) throw InvalidArgument("bin width must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> bins;
  for (std::size_t lo = 1; lo <= w; lo += width) bins.emplace_back(lo, std::min(lo + width - 1, w));
  return bins;
}

// A grouped recall table; rows of groups without instances are omitted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const {
    csv::write_record(out, header);
    for (const auto& r : rows) csv::write_record(out, r);
  }
};

struct Breakdowns {
  Table by_class;
  Table by_year;
  Table by_distance;
  Table per_citation;  // recall against training frequency, for scatter plots
};

namespace detail {
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename Key, typename KeyFn, typename LabelFn>
Table group_table(std::span<const EvalInstance> instances, std::span<const std::size_t> ks,
                  std::vector<std::string> key_columns, KeyFn key_of, LabelFn labels) {
  std::map<Key, std::vector<const EvalInstance*>> groups;
  for (const auto& inst : instances) {
    if (auto key = key_of(inst)) groups[*key].push_back(&inst);
  }
  Table t;
  t.header = std::move(key_columns);
  t.header.push_back("n");
  for (std::size_t k : ks) t.header.push_back("recall@" + std::to_string(k));
  for (const auto& [key, members] : groups) {
    auto row = labels(key, members);
    row.push_back(std::to_string(members.size()));
    for (std::size_t k : ks) {
      std::size_t hits = 0;
      for (const auto* m : members) hits += m->hit(k);
      row.push_back(fmt_num(static_cast<double>(hits) / static_cast<double>(members.size())));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}
}  // namespace detail

// Recall grouped by citation class, decision year, forecast distance bin
// (when forecast_len > 0) and target citation.
inline Breakdowns breakdowns(std::span<const EvalInstance> instances, std::span<const std::size_t> ks,
                             std::size_t forecast_len = 0, std::size_t bin_width = 16) {
  Breakdowns b;
  b.by_class = detail::group_table<CitationClass>(
      instances, ks, {"class"}, [](const EvalInstance& i) { return std::optional(i.cls); },
      [](CitationClass c, const auto&) { return std::vector<std::string>{std::string(to_string(c))}; });
  b.by_year = detail::group_table<int>(
      instances, ks, {"year"}, [](const EvalInstance& i) { return std::optional(i.year); },
      [](int y, const auto&) { return std::vector<std::string>{std::to_string(y)}; });
  const auto bins = distance_bins(forecast_len, bin_width);
  b.by_distance = detail::group_table<std::size_t>(
      instances, ks, {"distance_min", "distance_max"},
      [&](const EvalInstance& i) -> std::optional<std::size_t> {
        if (i.distance == 0 || i.distance > forecast_len) return std::nullopt;
        return (i.distance - 1) / bin_width;
      },
      [&](std::size_t bin, const auto&) {
        return std::vector<std::string>{std::to_string(bins[bin].first),
                                        std::to_string(bins[bin].second)};
      });
  b.per_citation = detail::group_table<Index>(
      instances, ks, {"citation", "class", "training_count"},
      [](const EvalInstance& i) { return std::optional(i.target); },
      [](Index c, const std::vector<const EvalInstance*>& members) {
        return std::vector<std::string>{std::to_string(c),
                                        std::string(to_string(members.front()->cls)),
                                        std::to_string(members.front()->target_count)};
      });
  return b;
}

}  // namespace citerec
