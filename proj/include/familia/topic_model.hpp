#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/error.hpp"

namespace familia {

enum class ModelKind { kLda, kSentenceLda };

inline const char* to_string(ModelKind kind) {
  return kind == ModelKind::kLda ? "lda" : "slda";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lda") return ModelKind::kLda;
  if (s == "slda") return ModelKind::kSentenceLda;
  throw Error("unknown model kind: " + s);
}

struct TopicModelParams {
  int32_t num_topics = 0;
  double alpha = 0.0;  // symmetric document-topic prior
  double beta = 0.0;   // symmetric topic-word prior

  void validate() const {
    if (num_topics < 1) throw Error("num_topics must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("beta must be > 0");
  }
};

// Griffiths-Steyvers style defaults.
inline TopicModelParams default_params(int32_t num_topics, double alpha = 0.0, double beta = 0.01) {
  if (alpha <= 0.0) alpha = 50.0 / std::max(num_topics, 1);
  return TopicModelParams{num_topics, alpha, beta};
}

// Sparse word-topic counts, one sorted (topic, count) column per word. The
// samplers touch exactly one word column (all K rows) per conditional, so the
// per-word layout keeps those lookups contiguous. Totals per topic are dense.
class WordTopicCounts {
 public:
  WordTopicCounts() = default;
  explicit WordTopicCounts(int32_t vocab_size) : columns_(static_cast<size_t>(vocab_size)) {}

  int32_t vocab_size() const { return static_cast<int32_t>(columns_.size()); }

  int32_t count(int32_t word, int32_t topic) const {
    const auto& col = columns_[word];
    auto it = std::lower_bound(col.begin(), col.end(), topic,
                               [](const auto& e, int32_t t) { return e.first < t; });
    return (it != col.end() && it->first == topic) ? it->second : 0;
  }

  void add(int32_t word, int32_t topic, int32_t delta) {
    auto& col = columns_[word];
    auto it = std::lower_bound(col.begin(), col.end(), topic,
                               [](const auto& e, int32_t t) { return e.first < t; });
    if (it != col.end() && it->first == topic) {
      const int64_t updated = static_cast<int64_t>(it->second) + delta;
      if (updated < 0) throw Error("word-topic count went negative");
      if (updated == 0) {
        col.erase(it);
      } else {
        it->second = static_cast<int32_t>(updated);
      }
    } else {
      if (delta < 0) throw Error("word-topic count went negative");
      if (delta > 0) col.insert(it, {topic, delta});
    }
  }

  // Nonzero (topic, count) entries for one word, ascending topic id.
  std::span<const std::pair<int32_t, int32_t>> column(int32_t word) const {
    return columns_[word];
  }

 private:
  std::vector<std::vector<std::pair<int32_t, int32_t>>> columns_;
};

// Length-K point on the probability simplex.
using TopicDistribution = std::vector<double>;

inline void validate_distribution(std::span<const double> p, double tol = 1e-6) {
  if (p.empty()) throw Error("topic distribution is empty");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error("topic distribution has invalid entries");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) throw Error("topic distribution does not sum to 1");
}

struct TopicModel {
  TopicModelParams params;
  ModelKind kind = ModelKind::kLda;
  Vocabulary vocab;
  WordTopicCounts word_topic;             // n_kw, stored per word column
  std::vector<int64_t> topic_totals;      // n_k

  int32_t num_topics() const { return params.num_topics; }
  int32_t vocab_size() const { return vocab.size(); }

  int64_t total_count() const {
    return std::accumulate(topic_totals.begin(), topic_totals.end(), int64_t{0});
  }

  // Smoothed topic-word probability (n_kw + beta) / (n_k + V beta).
  double phi(int32_t topic, int32_t word) const {
    return (word_topic.count(word, topic) + params.beta) /
           (static_cast<double>(topic_totals[topic]) + vocab_size() * params.beta);
  }

  // Dense phi column for one word, O(K + nnz).
  void phi_column(int32_t word, std::span<double> out) const {
    const double beta = params.beta;
    const double vbeta = vocab_size() * beta;
    for (int32_t k = 0; k < params.num_topics; ++k) {
      out[k] = beta / (static_cast<double>(topic_totals[k]) + vbeta);
    }
    for (const auto& [topic, count] : word_topic.column(word)) {
      out[topic] = (count + beta) / (static_cast<double>(topic_totals[topic]) + vbeta);
    }
  }

  void validate() const {
    params.validate();
    if (vocab.size() != word_topic.vocab_size()) {
      throw Error("model vocabulary size does not match count table");
    }
    if (static_cast<int32_t>(topic_totals.size()) != params.num_topics) {
      throw Error("topic totals length does not match num_topics");
    }
    std::vector<int64_t> recomputed(params.num_topics, 0);
    for (int32_t w = 0; w < word_topic.vocab_size(); ++w) {
      for (const auto& [topic, count] : word_topic.column(w)) {
        if (topic < 0 || topic >= params.num_topics) throw Error("topic id out of range in counts");
        if (count < 0) throw Error("negative count in model");
        recomputed[topic] += count;
      }
    }
    for (int32_t k = 0; k < params.num_topics; ++k) {
      if (recomputed[k] != topic_totals[k]) {
        throw Error("topic totals inconsistent with word-topic counts");
      }
    }
  }
};

}  // namespace familia
