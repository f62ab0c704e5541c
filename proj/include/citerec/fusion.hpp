#pragma once

// Metadata fusion for either recommender.
//
// Each candidate citation gets a feature row: the base recommender score
// followed by P(c | year), P(c | issue area) and P(c | judge) for the enabled
// metadata features. A linear ranking SVM learns one weight per column from
// pairwise (true citation vs. wrong candidate) differences; the fused score
// is the weighted sum of scaled columns.
//
// Columns are scaled by their min-max range measured on the pairwise rows.
// The shift part of min-max scaling is not applied: it cancels in every
// pairwise difference, and keeping rows antisymmetric ((x, +1) mirrors
// (-x, -1)) lets a bias-free linear model fit them.

#include <array>
#include <cmath>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/error.hpp"
#include "citerec/hash.hpp"
#include "citerec/ranked_list.hpp"
#include "json.hpp"

namespace citerec {

enum class Feature { Year = 0, IssueArea = 1, Vlj = 2 };

inline constexpr std::array<Feature, 3> kAllFeatures = {Feature::Year, Feature::IssueArea,
                                                        Feature::Vlj};

inline std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::Year: return "year";
    case Feature::IssueArea: return "issue_area";
    case Feature::Vlj: break;
  }
  return "vlj";
}

inline int feature_value(const Metadata& m, Feature f) {
  switch (f) {
    case Feature::Year: return m.year;
    case Feature::IssueArea: return m.issue_area;
    case Feature::Vlj: break;
  }
  return m.vlj;
}

// Laplace-smoothed P(c | feature = value) from training citation occurrences
// (UNK included, so each conditional distribution sums to 1 over the whole
// vocabulary).
class FeatureScoreTable {
 public:
  static FeatureScoreTable build(const std::vector<Document>& train, std::size_t vocab_size,
                                 double alpha = 1.0) {
    if (vocab_size == 0) throw InvalidArgument("feature table: empty vocabulary");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be >= 0");
    FeatureScoreTable t;
    t.alpha_ = alpha;
    t.vocab_size_ = vocab_size;
    for (const auto& doc : train) {
      for (const auto& tok : doc.tokens) {
        if (!tok.is_cite()) continue;
        for (Feature f : kAllFeatures) {
          auto& row = t.rows_[static_cast<int>(f)][feature_value(doc.metadata, f)];
          ++row.counts[tok.citation()];
          ++row.total;
        }
      }
    }
    return t;
  }

  // (count(c, value) + alpha) / (count(value) + alpha * V); 1/V for a value
  // never seen in training.
  double score(Feature f, int value, Index c) const {
    const auto& rows = rows_[static_cast<int>(f)];
    const auto it = rows.find(value);
    const double v = static_cast<double>(vocab_size_);
    if (it == rows.end()) return 1.0 / v;
    const auto ct = it->second.counts.find(c);
    const double count = ct == it->second.counts.end() ? 0.0 : static_cast<double>(ct->second);
    const double denom = static_cast<double>(it->second.total) + alpha_ * v;
    if (denom == 0.0) return 1.0 / v;
    return (count + alpha_) / denom;
  }

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  double alpha() const noexcept { return alpha_; }

  std::vector<int> values(Feature f) const {
    std::vector<int> out;
    for (const auto& [v, row] : rows_[static_cast<int>(f)]) out.push_back(v);
    return out;
  }

 private:
  struct Row {
    std::unordered_map<Index, std::uint64_t> counts;
    std::uint64_t total = 0;
  };
  double alpha_ = 1.0;
  std::size_t vocab_size_ = 0;
  std::array<std::map<int, Row>, 3> rows_;
};

// Which metadata columns follow the base score column.
struct FeatureSet {
  bool year = true;
  bool issue_area = true;
  bool vlj = true;

  std::vector<Feature> enabled() const {
    std::vector<Feature> out;
    if (year) out.push_back(Feature::Year);
    if (issue_area) out.push_back(Feature::IssueArea);
    if (vlj) out.push_back(Feature::Vlj);
    return out;
  }

  std::vector<std::string> column_names() const {
    std::vector<std::string> out = {"base"};
    for (Feature f : enabled()) out.emplace_back(to_string(f));
    return out;
  }
};

// Metadata columns of one candidate (base score not included).
inline std::vector<double> metadata_row(const FeatureScoreTable& table, const FeatureSet& features,
                                        const Metadata& meta, Index c) {
  std::vector<double> row;
  for (Feature f : features.enabled()) row.push_back(table.score(f, feature_value(meta, f), c));
  return row;
}

struct Scaler {
  double min = 0.0;
  double max = 0.0;

  // Range scaling; a degenerate column maps to 0.
  double apply(double x) const { return max > min ? x / (max - min) : 0.0; }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

// Full feature rows (base score first) of the true citation and of the
// wrong candidates for one prediction.
struct RankingInstance {
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

struct PairwiseDataset {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<Scaler> scalers;

  std::size_t columns() const noexcept { return scalers.size(); }
};

// Emits (x+ - x-, +1) and (x- - x+, -1) for every positive/negative pair and
// records each column's min and max over the emitted rows.
inline PairwiseDataset pairwise_transform(const std::vector<RankingInstance>& instances) {
  PairwiseDataset data;
  std::size_t cols = 0;
  for (const auto& inst : instances) {
    for (const auto& neg : inst.negatives) {
      if (cols == 0) cols = inst.positive.size();
      if (inst.positive.size() != cols || neg.size() != cols) {
        throw InvalidArgument("pairwise transform: feature rows differ in length");
      }
      std::vector<double> d(cols);
      for (std::size_t i = 0; i < cols; ++i) d[i] = inst.positive[i] - neg[i];
      std::vector<double> m(cols);
      for (std::size_t i = 0; i < cols; ++i) m[i] = -d[i];
      data.rows.push_back(std::move(d));
      data.labels.push_back(+1);
      data.rows.push_back(std::move(m));
      data.labels.push_back(-1);
    }
  }
  if (data.rows.empty()) throw InvalidArgument("pairwise transform: no negatives in any instance");
  data.scalers.assign(cols, {});
  for (std::size_t i = 0; i < cols; ++i) {
    data.scalers[i] = {data.rows[0][i], data.rows[0][i]};
    for (const auto& r : data.rows) {
      data.scalers[i].min = std::min(data.scalers[i].min, r[i]);
      data.scalers[i].max = std::max(data.scalers[i].max, r[i]);
    }
  }
  return data;
}

struct FusionWeights {
  std::vector<std::string> columns;
  std::vector<double> w;
  std::vector<Scaler> scalers;

  void save(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["columns"] = columns;
    j["w"] = w;
    auto& s = j["scalers"] = nlohmann::ordered_json::array();
    for (const auto& sc : scalers) s.push_back({{"min", sc.min}, {"max", sc.max}});
    out << j.dump(2) << '\n';
  }

  static FusionWeights load(std::istream& in) {
    FusionWeights fw;
    try {
      const auto j = nlohmann::json::parse(in);
      fw.columns = j.at("columns").get<std::vector<std::string>>();
      fw.w = j.at("w").get<std::vector<double>>();
      for (const auto& s : j.at("scalers")) {
        fw.scalers.push_back({s.at("min").get<double>(), s.at("max").get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("fusion weights: ") + e.what());
    }
    if (fw.w.size() != fw.columns.size() || fw.scalers.size() != fw.columns.size()) {
      throw FormatError("fusion weights: columns, w and scalers differ in length");
    }
    return fw;
  }
};

struct SvmOptions {
  double c = 1.0;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
};

// Linear SVM without bias on the scaled pairwise rows, trained by
// stochastic subgradient descent (Pegasos) on
//
//   (lambda/2) |w|^2 + (1/n) sum_i max(0, 1 - y_i w.x_i),  lambda = 1/(C n)
//
// with a fixed per-epoch shuffle and iterate averaging. Returns the average.
inline FusionWeights train_linear_svm(const PairwiseDataset& data, SvmOptions opts = {},
                                      std::vector<std::string> columns = {}) {
  if (data.rows.empty()) throw InvalidArgument("svm: empty dataset");
  if (!(opts.c > 0.0)) throw InvalidArgument("svm: C must be positive");
  const std::size_t cols = data.columns();
  if (columns.empty()) {
    for (std::size_t i = 0; i < cols; ++i) columns.push_back("f" + std::to_string(i));
  }
  if (columns.size() != cols) throw InvalidArgument("svm: column names do not match data");

  std::vector<std::vector<double>> x;
  x.reserve(data.rows.size());
  for (const auto& r : data.rows) {
    if (r.size() != cols) throw InvalidArgument("svm: ragged rows");
    std::vector<double> s(cols);
    for (std::size_t i = 0; i < cols; ++i) {
      if (!std::isfinite(r[i])) throw InvalidArgument("svm: non-finite feature value");
      s[i] = data.scalers[i].apply(r[i]);
    }
    x.push_back(std::move(s));
  }

  const std::size_t n = x.size();
  const double lambda = 1.0 / (opts.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<double> w(cols, 0.0), avg(cols, 0.0);
  std::vector<std::size_t> order(n);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order.begin(), order.end());
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      double margin = 0.0;
      for (std::size_t j = 0; j < cols; ++j) margin += w[j] * x[i][j];
      margin *= data.labels[i];
      const double shrink = 1.0 - eta * lambda;
      for (std::size_t j = 0; j < cols; ++j) w[j] *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < cols; ++j) w[j] += eta * data.labels[i] * x[i][j];
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > radius) {
        for (double& v : w) v *= radius / norm;
      }
      for (std::size_t j = 0; j < cols; ++j) avg[j] += w[j];
    }
  }
  if (t > 0) {
    for (double& v : avg) v /= static_cast<double>(t);
  }
  return {std::move(columns), std::move(avg), data.scalers};
}

// Fused score of one full feature row.
inline double fused_score(std::span<const double> row, const FusionWeights& fw) {
  if (row.size() != fw.w.size()) throw InvalidArgument("fuse: weight/feature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) s += fw.w[i] * fw.scalers[i].apply(row[i]);
  return s;
}

// Reranks the base candidates; meta_rows[i] holds the metadata columns of
// base[i]. Never introduces candidates.
inline RankedList fuse(const RankedList& base, const std::vector<std::vector<double>>& meta_rows,
                       const FusionWeights& fw, std::size_t top_n) {
  if (meta_rows.size() != base.size()) {
    throw InvalidArgument("fuse: one metadata row per base candidate required");
  }
  std::vector<Ranked> out;
  out.reserve(base.size());
  std::vector<double> row;
  for (std::size_t i = 0; i < base.size(); ++i) {
    row.assign(1, base[i].score);
    row.insert(row.end(), meta_rows[i].begin(), meta_rows[i].end());
    out.push_back({base[i].citation, fused_score(row, fw)});
  }
  return RankedList::from_scores(std::move(out), top_n);
}

}  // namespace citerec
