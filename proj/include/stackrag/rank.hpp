#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/text.hpp"

namespace stackrag {

template <typename Id>
struct Scored {
  Id id;
  double score = 0.0;
};

namespace detail {

struct Bm25Doc {
  std::unordered_map<std::string, int> tf;
  std::size_t length = 0;
};

}  // namespace detail

// Okapi BM25 with k1=1.2, b=0.75 and the smoothed IDF
// ln(1 + (N - df + 0.5) / (df + 0.5)), which is non-negative for every df
// in [0, N]. Query terms are summed with multiplicity. Returns the top k
// documents by score; equal scores keep input order.
template <typename Id>
inline std::vector<Scored<Id>> bm25_topk(
    const std::string& query,
    const std::vector<std::pair<Id, std::string>>& documents, std::size_t k,
    double k1 = 1.2, double b = 0.75) {
  if (k == 0) throw PreconditionError("bm25 k must be >= 1");
  const std::vector<std::string> query_tokens = tokenize(query);
  const std::size_t n = documents.size();
  std::vector<detail::Bm25Doc> docs(n);
  double total_len = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& tok : tokenize(documents[i].second)) {
      ++docs[i].tf[tok];
      ++docs[i].length;
    }
    total_len += static_cast<double>(docs[i].length);
  }

  std::unordered_map<std::string, int> df;
  for (const auto& d : docs) {
    for (const auto& [term, count] : d.tf) {
      (void)count;
      ++df[term];
    }
  }

  std::vector<Scored<Id>> scored;
  scored.reserve(n);
  const double avgdl = n == 0 ? 0.0 : total_len / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (const auto& term : query_tokens) {
      auto it = docs[i].tf.find(term);
      if (it == docs[i].tf.end()) continue;  // tf=0 contributes nothing
      const double tf = static_cast<double>(it->second);
      const double dfi = static_cast<double>(df[term]);
      const double idf =
          std::log(1.0 + (static_cast<double>(n) - dfi + 0.5) / (dfi + 0.5));
      const double dl = static_cast<double>(docs[i].length);
      score += idf * tf * (k1 + 1.0) /
               (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    scored.push_back({documents[i].first, score});
  }

  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored<Id>& a, const Scored<Id>& b2) {
                     return a.score > b2.score;
                   });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("vector dimensions differ: " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw ZeroVector("cosine similarity of a zero vector is undefined");
  }
  return dot(a, b) / (na * nb);
}

// Greedy MMR over candidates already scored against the query:
//   argmax over unselected of
//     lambda * cos(query, d) - (1 - lambda) * max over selected cos(d, s).
// The first pick has no selected set, so its diversity term is 0 and it is
// simply the candidate most similar to the query. Ties keep candidate input
// order. lambda=1 degenerates to top-k by query similarity.
template <typename Id>
inline std::vector<Id> mmr_select(
    const std::vector<double>& query_embedding,
    const std::vector<std::pair<Id, std::vector<double>>>& candidates,
    std::size_t k, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw PreconditionError("mmr lambda must be in [0, 1]");
  }
  const std::size_t n = candidates.size();
  std::vector<double> query_sim(n);
  for (std::size_t i = 0; i < n; ++i) {
    query_sim[i] = cosine_similarity(query_embedding, candidates[i].second);
  }

  std::vector<bool> selected(n, false);
  std::vector<std::size_t> picks;
  std::vector<Id> out;
  const std::size_t want = std::min(k, n);
  out.reserve(want);
  while (picks.size() < want) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (selected[i]) continue;
      // Max over an empty selected set is defined as 0; over a non-empty
      // set it is the true max, which can be negative.
      double diversity = 0.0;
      bool first = true;
      for (std::size_t j : picks) {
        const double sim =
            cosine_similarity(candidates[i].second, candidates[j].second);
        diversity = first ? sim : std::max(diversity, sim);
        first = false;
      }
      const double mmr = lambda * query_sim[i] - (1.0 - lambda) * diversity;
      if (best == n || mmr > best_score) {
        best = i;
        best_score = mmr;
      }
    }
    selected[best] = true;
    picks.push_back(best);
    out.push_back(candidates[best].first);
  }
  return out;
}

}  // namespace stackrag
