#pragma once

// Deliberately naive dense reference implementations used to check the
// sparse production code.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

struct Scored {
  unsigned citation;
  double score;
};

inline bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.citation < b.citation;
}

// scheme: 0 binary, 1 tf, 2 tf-idf
inline std::vector<double> dense_vector(const std::vector<unsigned>& cites, std::size_t dims,
                                        int scheme, const std::vector<double>& idf) {
  std::vector<double> v(dims, 0.0);
  for (unsigned c : cites) v[c] += 1.0;
  for (std::size_t i = 0; i < dims; ++i) {
    if (v[i] == 0.0) continue;
    if (scheme == 0) v[i] = 1.0;
    if (scheme == 2) v[i] *= idf[i];
  }
  return v;
}

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return d / std::sqrt(na * nb);
}

struct CfCorpus {
  std::vector<std::string> ids;
  std::vector<std::vector<unsigned>> cites;  // UNK already removed
  std::size_t dims = 0;
  unsigned unk = 0;
};

// score(d, c) = sum_{d' in top K} sim(d, d') v_{d',c} / sum sim(d, d')
inline std::vector<Scored> cf_scores(const CfCorpus& corpus, const std::vector<unsigned>& partial,
                                     int scheme, std::size_t k) {
  std::vector<double> idf(corpus.dims, 0.0);
  if (scheme == 2) {
    for (std::size_t c = 0; c < corpus.dims; ++c) {
      std::size_t df = 0;
      for (const auto& d : corpus.cites) df += std::count(d.begin(), d.end(), c) > 0;
      if (df) idf[c] = std::log(static_cast<double>(corpus.cites.size()) / static_cast<double>(df));
    }
  }
  std::vector<unsigned> q_cites;
  for (unsigned c : partial) {
    if (c != corpus.unk) q_cites.push_back(c);
  }
  const auto q = dense_vector(q_cites, corpus.dims, scheme, idf);

  struct N {
    std::string id;
    std::size_t doc;
    double sim;
  };
  std::vector<N> all;
  for (std::size_t d = 0; d < corpus.ids.size(); ++d) {
    all.push_back({corpus.ids[d], d,
                   dense_cosine(q, dense_vector(corpus.cites[d], corpus.dims, scheme, idf))});
  }
  std::sort(all.begin(), all.end(), [](const N& a, const N& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);

  double denom = 0;
  for (const auto& n : all) denom += n.sim;
  std::vector<Scored> out;
  if (denom == 0) return out;
  std::vector<double> numer(corpus.dims, 0.0);
  for (const auto& n : all) {
    const auto v = dense_vector(corpus.cites[n.doc], corpus.dims, scheme, idf);
    for (std::size_t c = 0; c < corpus.dims; ++c) numer[c] += n.sim * v[c];
  }
  for (unsigned c = 0; c < corpus.dims; ++c) {
    if (c == corpus.unk || std::find(partial.begin(), partial.end(), c) != partial.end()) continue;
    if (numer[c] > 0) out.push_back({c, numer[c] / denom});
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

// score(b_d, c) = 1/k_c sum_j (b_d . b_j)^2 over dense vectors.
inline std::vector<Scored> context_scores(const std::vector<double>& query,
                                          const std::vector<std::vector<std::vector<double>>>& bank,
                                          unsigned unk) {
  std::vector<Scored> out;
  for (unsigned c = 0; c < bank.size(); ++c) {
    if (c == unk || bank[c].empty()) continue;
    double sum = 0;
    for (const auto& b : bank[c]) {
      double d = 0;
      for (std::size_t t = 0; t < query.size(); ++t) d += query[t] * b[t];
      sum += d * d;
    }
    const double s = sum / static_cast<double>(bank[c].size());
    if (s > 0) out.push_back({c, s});
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

}  // namespace oracle
