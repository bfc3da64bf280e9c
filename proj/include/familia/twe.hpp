#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/rng.hpp"

namespace familia {

// Word, topic and context vectors with a shared dimension. Word and topic
// vectors are the trained predictors; context vectors are the output side of
// skip-gram and usually stay internal.
struct EmbeddingTable {
  int32_t dim = 0;
  int32_t num_words = 0;
  int32_t num_topics = 0;
  std::vector<std::string> word_names;
  std::vector<double> word;     // num_words x dim
  std::vector<double> topic;    // num_topics x dim
  std::vector<double> context;  // num_words x dim
  std::unordered_map<std::string, int32_t> word_ids;

  std::span<double> word_vec(int32_t w) {
    return {word.data() + static_cast<size_t>(w) * dim, static_cast<size_t>(dim)};
  }
  std::span<const double> word_vec(int32_t w) const {
    return {word.data() + static_cast<size_t>(w) * dim, static_cast<size_t>(dim)};
  }
  std::span<double> topic_vec(int32_t k) {
    return {topic.data() + static_cast<size_t>(k) * dim, static_cast<size_t>(dim)};
  }
  std::span<const double> topic_vec(int32_t k) const {
    return {topic.data() + static_cast<size_t>(k) * dim, static_cast<size_t>(dim)};
  }
  std::span<double> context_vec(int32_t w) {
    return {context.data() + static_cast<size_t>(w) * dim, static_cast<size_t>(dim)};
  }
  std::span<const double> context_vec(int32_t w) const {
    return {context.data() + static_cast<size_t>(w) * dim, static_cast<size_t>(dim)};
  }
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

// Negative-sampling pair loss for one (center, positive context) pair:
//   L = -log s(v.u_pos) - sum_n log s(-v.u_neg)
inline double sgns_loss(std::span<const double> center, std::span<const double> positive,
                        const std::vector<std::span<const double>>& negatives) {
  double loss = detail::softplus(-detail::dot(center, positive));
  for (const auto& neg : negatives) loss += detail::softplus(detail::dot(center, neg));
  return loss;
}

// Loss plus analytic gradients, written into the (pre-sized) gradient spans.
// This is the exact update rule the trainer applies; the tests diff it against
// central finite differences of sgns_loss.
inline double sgns_loss_and_grad(std::span<const double> center, std::span<const double> positive,
                                 const std::vector<std::span<const double>>& negatives,
                                 std::span<double> g_center, std::span<double> g_positive,
                                 std::vector<std::span<double>>& g_negatives) {
  const size_t dim = center.size();
  std::fill(g_center.begin(), g_center.end(), 0.0);
  std::fill(g_positive.begin(), g_positive.end(), 0.0);
  for (auto& g : g_negatives) std::fill(g.begin(), g.end(), 0.0);

  double loss = 0.0;
  {
    const double dp = detail::dot(center, positive);
    loss += detail::softplus(-dp);
    const double coeff = detail::sigmoid(dp) - 1.0;  // dL/d(dot), positive pair
    for (size_t i = 0; i < dim; ++i) {
      g_center[i] += coeff * positive[i];
      g_positive[i] += coeff * center[i];
    }
  }
  for (size_t n = 0; n < negatives.size(); ++n) {
    const double dn = detail::dot(center, negatives[n]);
    loss += detail::softplus(dn);
    const double coeff = detail::sigmoid(dn);  // dL/d(dot), negative pair
    for (size_t i = 0; i < dim; ++i) {
      g_center[i] += coeff * negatives[n][i];
      g_negatives[n][i] += coeff * center[i];
    }
  }
  return loss;
}

// word2vec-style unigram table: freq^power smoothing, table_size slots.
inline std::vector<int32_t> build_unigram_table(std::span<const int64_t> freq,
                                                size_t table_size = 1000000,
                                                double power = 0.75) {
  if (freq.empty()) throw Error("unigram table: empty frequency vector");
  double total = 0.0;
  for (int64_t f : freq) total += std::pow(static_cast<double>(f), power);
  std::vector<int32_t> table(table_size);
  size_t w = 0;
  double cum = std::pow(static_cast<double>(freq[0]), power) / total;
  for (size_t i = 0; i < table_size; ++i) {
    table[i] = static_cast<int32_t>(w);
    if (static_cast<double>(i + 1) / static_cast<double>(table_size) > cum &&
        w + 1 < freq.size()) {
      ++w;
      cum += std::pow(static_cast<double>(freq[w]), power) / total;
    }
  }
  return table;
}

struct TweConfig {
  int32_t dim = 100;
  int32_t window = 5;     // context radius
  int32_t negatives = 5;  // noise words per positive pair
  int32_t epochs = 5;
  double step_size = 0.025;
};

struct TweTrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_losses;  // mean pair loss per epoch
};

// TWE-1: for every (center word, context word) pair the word vector and the
// topic vector of the center's assignment are each trained as skip-gram
// predictors of the context, sharing one set of context vectors.
// Deterministic given the seed; single-threaded.
inline TweTrainResult train_twe(const Corpus& corpus,
                                const std::vector<std::vector<int32_t>>& assignments,
                                int32_t num_topics, const TweConfig& cfg, uint64_t seed) {
  if (corpus.docs.empty()) throw Error("train_twe: empty corpus");
  if (cfg.dim < 1 || cfg.window < 1 || cfg.negatives < 1 || cfg.epochs < 1) {
    throw Error("train_twe: dim, window, negatives and epochs must be >= 1");
  }
  if (!(cfg.step_size > 0.0)) throw Error("train_twe: step_size must be > 0");
  if (num_topics < 1) throw Error("train_twe: num_topics must be >= 1");
  if (assignments.size() != corpus.docs.size()) {
    throw Error("train_twe: assignments do not align with corpus documents");
  }
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    if (assignments[d].size() != corpus.docs[d].token_ids.size()) {
      throw Error("train_twe: assignments do not align with document tokens");
    }
    for (int32_t z : assignments[d]) {
      if (z < 0 || z >= num_topics) throw Error("train_twe: topic assignment out of range");
    }
  }

  const int32_t V = corpus.vocab.size();
  const int32_t dim = cfg.dim;

  TweTrainResult result;
  EmbeddingTable& table = result.table;
  table.dim = dim;
  table.num_words = V;
  table.num_topics = num_topics;
  table.word_names = corpus.vocab.tokens;
  table.word_ids = corpus.vocab.id_of;
  table.word.resize(static_cast<size_t>(V) * dim);
  table.topic.resize(static_cast<size_t>(num_topics) * dim);
  table.context.assign(static_cast<size_t>(V) * dim, 0.0);

  Rng rng(seed);
  const double init_range = 0.5 / dim;
  for (double& x : table.word) x = (rng.next_double() * 2.0 - 1.0) * init_range;
  for (double& x : table.topic) x = (rng.next_double() * 2.0 - 1.0) * init_range;

  const auto unigram = build_unigram_table(corpus.vocab.freq);
  const auto table_size = static_cast<uint32_t>(unigram.size());

  // Exact positive-pair count for the linear step-size decay.
  int64_t total_pairs = 0;
  for (const auto& doc : corpus.docs) {
    const int64_t L = doc.length();
    for (int64_t i = 0; i < L; ++i) {
      total_pairs += std::min(L - 1, i + cfg.window) - std::max<int64_t>(0, i - cfg.window);
    }
  }
  total_pairs *= cfg.epochs;
  if (total_pairs == 0) throw Error("train_twe: no context pairs (documents too short)");

  const double min_step = cfg.step_size / 100.0;
  std::vector<double> g_center(dim), g_positive(dim);
  std::vector<double> g_neg_buf(static_cast<size_t>(cfg.negatives) * dim);
  std::vector<int32_t> neg_ids(cfg.negatives);

  int64_t pair_index = 0;
  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int64_t epoch_pairs = 0;
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
      const auto& tokens = corpus.docs[d].token_ids;
      const auto& zs = assignments[d];
      const int32_t L = static_cast<int32_t>(tokens.size());
      for (int32_t i = 0; i < L; ++i) {
        const int32_t lo = std::max(0, i - cfg.window);
        const int32_t hi = std::min(L - 1, i + cfg.window);
        for (int32_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const int32_t ctx = tokens[j];
          const double lr =
              cfg.step_size - (cfg.step_size - min_step) *
                                  (static_cast<double>(pair_index) / static_cast<double>(total_pairs));
          ++pair_index;
          ++epoch_pairs;

          // One update with the word vector, one with the topic vector, each
          // against freshly drawn noise words.
          for (int pass = 0; pass < 2; ++pass) {
            std::span<double> center =
                pass == 0 ? table.word_vec(tokens[i]) : table.topic_vec(zs[i]);

            int32_t n_negs = 0;
            for (int32_t n = 0; n < cfg.negatives; ++n) {
              const int32_t cand = unigram[rng.next_below(table_size)];
              if (cand == ctx) continue;  // word2vec skips collisions
              neg_ids[n_negs++] = cand;
            }
            std::vector<std::span<const double>> negs;
            std::vector<std::span<double>> g_negs;
            negs.reserve(n_negs);
            g_negs.reserve(n_negs);
            for (int32_t n = 0; n < n_negs; ++n) {
              negs.push_back(table.context_vec(neg_ids[n]));
              g_negs.emplace_back(g_neg_buf.data() + static_cast<size_t>(n) * dim,
                                  static_cast<size_t>(dim));
            }

            epoch_loss += sgns_loss_and_grad(center, table.context_vec(ctx), negs, g_center,
                                             g_positive, g_negs);
            for (int32_t x = 0; x < dim; ++x) center[x] -= lr * g_center[x];
            auto ctx_vec = table.context_vec(ctx);
            for (int32_t x = 0; x < dim; ++x) ctx_vec[x] -= lr * g_positive[x];
            for (int32_t n = 0; n < n_negs; ++n) {
              auto neg_vec = table.context_vec(neg_ids[n]);
              for (int32_t x = 0; x < dim; ++x) neg_vec[x] -= lr * g_negs[n][x];
            }
          }
        }
      }
    }
    result.epoch_losses.push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs)
                                                  : 0.0);
  }
  return result;
}

namespace detail {

inline double cosine_or_zero(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace detail

inline std::string topic_entry_name(int32_t k) { return "#topic_" + std::to_string(k); }

// Top-n words by cosine against the query's vector. A word query excludes
// itself. Query format: a vocabulary token, or "#topic_k" for topic k.
inline std::vector<std::pair<std::string, double>> nearest_words(const EmbeddingTable& table,
                                                                 const std::string& query,
                                                                 int32_t n) {
  if (n < 0) throw Error("nearest_words: n must be >= 0");
  std::span<const double> qvec;
  int32_t exclude = -1;
  if (query.rfind("#topic_", 0) == 0) {
    int32_t k = -1;
    try {
      k = static_cast<int32_t>(std::stol(query.substr(7)));
    } catch (const std::exception&) {
      throw Error("nearest_words: malformed topic query: " + query);
    }
    if (k < 0 || k >= table.num_topics) throw Error("nearest_words: topic id out of range");
    qvec = table.topic_vec(k);
  } else {
    auto it = table.word_ids.find(query);
    if (it == table.word_ids.end()) throw Error("nearest_words: unknown word: " + query);
    exclude = it->second;
    qvec = table.word_vec(exclude);
  }

  std::vector<std::pair<int32_t, double>> scored;
  scored.reserve(table.num_words);
  for (int32_t w = 0; w < table.num_words; ++w) {
    if (w == exclude) continue;
    scored.emplace_back(w, detail::cosine_or_zero(qvec, table.word_vec(w)));
  }
  const int32_t keep = std::min<int32_t>(n, static_cast<int32_t>(scored.size()));
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (int32_t i = 0; i < keep; ++i) {
    out.emplace_back(table.word_names[scored[i].first], scored[i].second);
  }
  return out;
}

// Embedding file: first line "N dim" with N = V + K, then one line per entry:
// token text (topics serialized as "#topic_k") followed by dim floats.
inline void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embedding file: " + path);
  out << (table.num_words + table.num_topics) << ' ' << table.dim << '\n';
  char buf[64];
  auto write_vec = [&](std::span<const double> v) {
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << ' ' << buf;
    }
    out << '\n';
  };
  for (int32_t w = 0; w < table.num_words; ++w) {
    out << table.word_names[w];
    write_vec(table.word_vec(w));
  }
  for (int32_t k = 0; k < table.num_topics; ++k) {
    out << topic_entry_name(k);
    write_vec(table.topic_vec(k));
  }
  if (!out) throw Error("I/O failure writing embedding file: " + path);
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file: " + path);
  int64_t n = 0;
  int32_t dim = 0;
  if (!(in >> n >> dim) || n < 1 || dim < 1) {
    throw Error("malformed embedding file header: " + path);
  }

  std::vector<std::pair<std::string, std::vector<double>>> words;
  std::vector<std::pair<int32_t, std::vector<double>>> topics;
  for (int64_t i = 0; i < n; ++i) {
    std::string name;
    if (!(in >> name)) throw Error("embedding file truncated: " + path);
    std::vector<double> vec(dim);
    for (int32_t x = 0; x < dim; ++x) {
      if (!(in >> vec[x])) throw Error("embedding file truncated: " + path);
    }
    if (name.rfind("#topic_", 0) == 0) {
      int32_t k = -1;
      try {
        k = static_cast<int32_t>(std::stol(name.substr(7)));
      } catch (const std::exception&) {
        throw Error("malformed topic entry '" + name + "' in " + path);
      }
      topics.emplace_back(k, std::move(vec));
    } else {
      words.emplace_back(std::move(name), std::move(vec));
    }
  }

  EmbeddingTable table;
  table.dim = dim;
  table.num_words = static_cast<int32_t>(words.size());
  table.num_topics = static_cast<int32_t>(topics.size());
  table.word.resize(words.size() * static_cast<size_t>(dim));
  table.topic.resize(topics.size() * static_cast<size_t>(dim));
  table.context.assign(words.size() * static_cast<size_t>(dim), 0.0);
  for (size_t w = 0; w < words.size(); ++w) {
    table.word_names.push_back(words[w].first);
    table.word_ids.emplace(words[w].first, static_cast<int32_t>(w));
    std::copy(words[w].second.begin(), words[w].second.end(),
              table.word.begin() + w * static_cast<size_t>(dim));
  }
  for (const auto& [k, vec] : topics) {
    if (k < 0 || k >= table.num_topics) {
      throw Error("embedding file topic ids must be dense 0..K-1: " + path);
    }
    std::copy(vec.begin(), vec.end(), table.topic.begin() + static_cast<size_t>(k) * dim);
  }
  return table;
}

}  // namespace familia
