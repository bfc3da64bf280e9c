#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/rng.hpp"
#include "familia/topic_model.hpp"
#include "familia/twe.hpp"

namespace familia {

// Entropy of a topic distribution in nats, 0 ln 0 := 0. Range [0, ln K].
inline double topic_entropy(std::span<const double> p) {
  validate_distribution(p);
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(h, 0.0);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine_similarity: dimension mismatch");
  if (a.empty()) throw Error("cosine_similarity: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Mean of the word vectors of the in-vocabulary tokens.
inline std::vector<double> embed_short_text(const std::vector<std::string>& tokens,
                                            const EmbeddingTable& table) {
  std::vector<double> mean(table.dim, 0.0);
  int32_t hits = 0;
  for (const auto& tok : tokens) {
    auto it = table.word_ids.find(tok);
    if (it == table.word_ids.end()) continue;
    const auto v = table.word_vec(it->second);
    for (int32_t i = 0; i < table.dim; ++i) mean[i] += v[i];
    ++hits;
  }
  if (hits == 0) throw Error("embed_short_text: no in-vocabulary tokens");
  for (double& x : mean) x /= hits;
  return mean;
}

struct ShortLongResult {
  double log_similarity = 0.0;  // sum over query words of ln sum_k phi(k,w) p_k
  int32_t oov_skipped = 0;
};

// Log-probability of the short text being generated from the long text's
// topic distribution. Returned in log space; products of per-word mixture
// probabilities underflow quickly. Repeated query words contribute repeatedly.
inline ShortLongResult short_long_similarity(const std::vector<std::string>& query,
                                             std::span<const double> doc_dist,
                                             const TopicModel& model) {
  if (static_cast<int32_t>(doc_dist.size()) != model.num_topics()) {
    throw Error("short_long_similarity: distribution length does not match model topics");
  }
  validate_distribution(doc_dist);
  const int32_t K = model.num_topics();
  std::vector<double> phi_col(K);
  ShortLongResult result;
  int32_t hits = 0;
  for (const auto& tok : query) {
    auto id = model.vocab.lookup(tok);
    if (!id) {
      ++result.oov_skipped;
      continue;
    }
    model.phi_column(*id, phi_col);
    double mix = 0.0;
    for (int32_t k = 0; k < K; ++k) mix += phi_col[k] * doc_dist[k];
    result.log_similarity += std::log(mix);
    ++hits;
  }
  if (hits == 0) throw Error("short_long_similarity: all query words out of vocabulary");
  return result;
}

struct ScoredWord {
  std::string token;
  double score = 0.0;
};

// Semantic keyword scores: for every distinct in-vocabulary word of the
// document, score = sum_k cos(v_w, z_k) p_k. Ranked descending, ties by
// ascending word id.
inline std::vector<ScoredWord> keyword_scores(const Document& doc,
                                              std::span<const double> doc_dist,
                                              const EmbeddingTable& table, int32_t top_n,
                                              const std::unordered_set<std::string>* stopwords = nullptr) {
  const int32_t K = table.num_topics;
  if (static_cast<int32_t>(doc_dist.size()) != K) {
    throw Error("keyword_scores: distribution length does not match table topics");
  }
  validate_distribution(doc_dist);
  if (top_n < 0) throw Error("keyword_scores: top_n must be >= 0");

  std::set<int32_t> distinct;
  for (int32_t w : doc.token_ids) {
    if (w < 0 || w >= table.num_words) throw Error("keyword_scores: word id outside table");
    distinct.insert(w);
  }

  std::vector<std::pair<int32_t, double>> scored;
  for (int32_t w : distinct) {
    if (stopwords != nullptr && stopwords->count(table.word_names[w]) > 0) continue;
    double score = 0.0;
    for (int32_t k = 0; k < K; ++k) {
      score += cosine_similarity(table.word_vec(w), table.topic_vec(k)) * doc_dist[k];
    }
    scored.emplace_back(w, score);
  }
  if (scored.empty()) throw Error("keyword_scores: empty candidate set");

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int32_t>(scored.size()) > top_n) scored.resize(top_n);

  std::vector<ScoredWord> out;
  out.reserve(scored.size());
  for (const auto& [w, s] : scored) out.push_back({table.word_names[w], s});
  return out;
}

// (1/sqrt(2)) * sqrt(sum (sqrt(p_i) - sqrt(q_i))^2), in [0, 1].
inline double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("hellinger_distance: length mismatch");
  validate_distribution(p);
  validate_distribution(q);
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    sum += d * d;
  }
  return std::sqrt(sum) / std::sqrt(2.0);
}

// sum_{p_i > 0} p_i ln(p_i / q_i). Errors where q has no support for p.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
  validate_distribution(p);
  validate_distribution(q);
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] <= 0.0) throw Error("kl_divergence: q lacks support where p is positive");
      sum += p[i] * std::log(p[i] / q[i]);
    }
  }
  return std::max(sum, 0.0);
}

// (KLD(P||M) + KLD(Q||M)) / 2 with M the midpoint. Symmetric, in [0, ln 2].
inline double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("jensen_shannon_divergence: length mismatch");
  std::vector<double> m(p.size());
  for (size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * (kl_divergence(p, m) + kl_divergence(q, m));
}

struct Clustering {
  std::vector<int32_t> assignments;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // recorded after each assignment pass
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding over raw simplex coordinates.
// Deterministic given the seed; empty clusters are re-seeded with the point
// farthest from its centroid; stops at an assignment fixpoint or max_iters.
inline Clustering cluster_topic_distributions(const std::vector<TopicDistribution>& dists,
                                              int32_t k, int32_t max_iters, uint64_t seed) {
  if (k < 1) throw Error("cluster: k must be >= 1");
  if (max_iters < 1) throw Error("cluster: max_iters must be >= 1");
  if (dists.empty()) throw Error("cluster: no points");
  const size_t n = dists.size();
  const size_t dim = dists[0].size();
  for (const auto& p : dists) {
    if (p.size() != dim) throw Error("cluster: inconsistent point dimensions");
  }
  {
    std::set<std::vector<double>> distinct(dists.begin(), dists.end());
    if (static_cast<size_t>(k) > distinct.size()) {
      throw Error("cluster: k exceeds the number of distinct points");
    }
  }

  Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);

  // k-means++ seeding.
  centroids.push_back(dists[rng.next_below(static_cast<uint32_t>(n))]);
  std::vector<double> d2(n);
  for (int32_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& cen : centroids) best = std::min(best, detail::squared_distance(dists[i], cen));
      d2[i] = best;
      total += best;
    }
    double u = rng.next_double() * total;
    size_t pick = n - 1;
    for (size_t i = 0; i < n; ++i) {
      u -= d2[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(dists[pick]);
  }

  Clustering result;
  result.assignments.assign(n, -1);
  std::vector<int32_t> prev(n, -1);

  for (int32_t iter = 0; iter < max_iters; ++iter) {
    // Assignment pass; ties go to the lowest centroid index.
    for (size_t i = 0; i < n; ++i) {
      int32_t best = 0;
      double best_d = detail::squared_distance(dists[i], centroids[0]);
      for (int32_t c = 1; c < k; ++c) {
        const double d = detail::squared_distance(dists[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      result.assignments[i] = best;
    }

    // Re-seed empty clusters with the farthest point.
    std::vector<int64_t> sizes(k, 0);
    for (int32_t a : result.assignments) sizes[a] += 1;
    for (int32_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      size_t far = 0;
      double far_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (sizes[result.assignments[i]] <= 1) continue;  // keep donor clusters non-empty
        const double d = detail::squared_distance(dists[i], centroids[result.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = dists[far];
      sizes[result.assignments[far]] -= 1;
      result.assignments[far] = c;
      sizes[c] += 1;
    }

    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      inertia += detail::squared_distance(dists[i], centroids[result.assignments[i]]);
    }
    result.inertia_history.push_back(inertia);

    if (result.assignments == prev) break;
    prev = result.assignments;

    // Update pass.
    for (int32_t c = 0; c < k; ++c) std::fill(centroids[c].begin(), centroids[c].end(), 0.0);
    std::vector<int64_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const int32_t c = result.assignments[i];
      counts[c] += 1;
      for (size_t x = 0; x < dim; ++x) centroids[c][x] += dists[i][x];
    }
    for (int32_t c = 0; c < k; ++c) {
      for (size_t x = 0; x < dim; ++x) centroids[c][x] /= static_cast<double>(counts[c]);
    }
  }

  // Leave centroids as the means of the final assignment.
  for (int32_t c = 0; c < k; ++c) std::fill(centroids[c].begin(), centroids[c].end(), 0.0);
  std::vector<int64_t> counts(k, 0);
  for (size_t i = 0; i < n; ++i) {
    const int32_t c = result.assignments[i];
    counts[c] += 1;
    for (size_t x = 0; x < dim; ++x) centroids[c][x] += dists[i][x];
  }
  for (int32_t c = 0; c < k; ++c) {
    for (size_t x = 0; x < dim; ++x) centroids[c][x] /= static_cast<double>(counts[c]);
  }
  result.centroids = std::move(centroids);
  result.inertia = 0.0;
  for (size_t i = 0; i < n; ++i) {
    result.inertia +=
        detail::squared_distance(dists[i], result.centroids[result.assignments[i]]);
  }
  return result;
}

}  // namespace familia
