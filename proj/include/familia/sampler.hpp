#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "familia/alias_table.hpp"
#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/rng.hpp"
#include "familia/topic_model.hpp"

namespace familia {

// Collapsed-Gibbs conditional for a single token, Griffiths-Steyvers scheme.
// Counts in the model and in doc_topic must already exclude the token being
// resampled. weight[k] = (n_dk + alpha) * (n_kw + beta) / (n_k + V beta).
inline void lda_conditional(const TopicModel& model, std::span<const int32_t> doc_topic,
                            int32_t word, std::span<double> weights) {
  const int32_t K = model.num_topics();
  const double alpha = model.params.alpha;
  const double beta = model.params.beta;
  const double vbeta = model.vocab_size() * beta;
  for (int32_t k = 0; k < K; ++k) {
    weights[k] = (doc_topic[k] + alpha) * beta /
                 (static_cast<double>(model.topic_totals[k]) + vbeta);
  }
  for (const auto& [topic, count] : model.word_topic.column(word)) {
    weights[topic] = (doc_topic[topic] + alpha) * (count + beta) /
                     (static_cast<double>(model.topic_totals[topic]) + vbeta);
  }
}

// Sentence-level conditional, computed in log space to survive long
// sentences. Counts must exclude the whole sentence being resampled; here
// doc_topic counts sentences, not tokens. With c_w the in-sentence count of
// word w and L the sentence length:
//   log w_k = log(n_dk + alpha)
//           + sum_w sum_{j=0}^{c_w-1} log(n_kw + beta + j)
//           - sum_{i=0}^{L-1}        log(n_k + V beta + i)
inline void slda_conditional_log(const TopicModel& model, std::span<const int32_t> doc_topic,
                                 std::span<const int32_t> sentence, std::span<double> log_weights) {
  if (sentence.empty()) throw Error("slda conditional: empty sentence");
  const int32_t K = model.num_topics();
  const double alpha = model.params.alpha;
  const double beta = model.params.beta;
  const double vbeta = model.vocab_size() * beta;
  const int32_t L = static_cast<int32_t>(sentence.size());

  // Group the sentence into (word, multiplicity) pairs.
  std::vector<int32_t> sorted(sentence.begin(), sentence.end());
  std::sort(sorted.begin(), sorted.end());

  for (int32_t k = 0; k < K; ++k) {
    double lw = std::log(doc_topic[k] + alpha);
    for (size_t i = 0; i < sorted.size();) {
      const int32_t w = sorted[i];
      size_t j = i;
      while (j < sorted.size() && sorted[j] == w) ++j;
      const double base = model.word_topic.count(w, k) + beta;
      for (size_t m = 0; m < j - i; ++m) lw += std::log(base + static_cast<double>(m));
      i = j;
    }
    const double denom = static_cast<double>(model.topic_totals[k]) + vbeta;
    for (int32_t i = 0; i < L; ++i) lw -= std::log(denom + i);
    log_weights[k] = lw;
  }
}

// In-place max-subtracted exponentiation; leaves normalized probabilities.
inline void log_weights_to_probs(std::span<double> log_weights) {
  double max_lw = log_weights[0];
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  double sum = 0.0;
  for (double& lw : log_weights) {
    lw = std::exp(lw - max_lw);
    sum += lw;
  }
  for (double& lw : log_weights) lw /= sum;
}

struct TrainResult {
  TopicModel model;
  // Per document: one topic id per token (LDA) or per sentence (SentenceLDA),
  // in corpus order. The per-document count table itself is dropped.
  std::vector<std::vector<int32_t>> assignments;
};

// Collapsed Gibbs training. Deterministic given (corpus, params, iters, seed).
inline TrainResult train(const Corpus& corpus, TopicModelParams params, ModelKind kind,
                         int32_t iters, uint64_t seed) {
  params.validate();
  if (corpus.docs.empty()) throw Error("train: empty corpus");
  if (iters < 1) throw Error("train: iters must be >= 1");

  const int32_t K = params.num_topics;
  const int32_t V = corpus.vocab.size();
  for (const auto& doc : corpus.docs) {
    for (int32_t w : doc.token_ids) {
      if (w < 0 || w >= V) throw Error("train: token id out of vocabulary range");
    }
  }

  TrainResult result;
  TopicModel& model = result.model;
  model.params = params;
  model.kind = kind;
  model.vocab = corpus.vocab;
  model.word_topic = WordTopicCounts(V);
  model.topic_totals.assign(K, 0);

  const size_t num_docs = corpus.docs.size();
  std::vector<std::vector<int32_t>> doc_topic(num_docs, std::vector<int32_t>(K, 0));
  result.assignments.resize(num_docs);

  Rng rng(seed);

  // Uniform random initial assignments.
  for (size_t d = 0; d < num_docs; ++d) {
    const Document& doc = corpus.docs[d];
    if (kind == ModelKind::kLda) {
      result.assignments[d].resize(doc.token_ids.size());
      for (size_t i = 0; i < doc.token_ids.size(); ++i) {
        const int32_t z = static_cast<int32_t>(rng.next_below(static_cast<uint32_t>(K)));
        result.assignments[d][i] = z;
        doc_topic[d][z] += 1;
        model.word_topic.add(doc.token_ids[i], z, 1);
        model.topic_totals[z] += 1;
      }
    } else {
      result.assignments[d].resize(doc.num_sentences());
      for (int32_t s = 0; s < doc.num_sentences(); ++s) {
        const int32_t z = static_cast<int32_t>(rng.next_below(static_cast<uint32_t>(K)));
        result.assignments[d][s] = z;
        doc_topic[d][z] += 1;
        for (int32_t w : doc.sentence(s)) {
          model.word_topic.add(w, z, 1);
          model.topic_totals[z] += 1;
        }
      }
    }
  }

  std::vector<double> weights(K);
  for (int32_t iter = 0; iter < iters; ++iter) {
    for (size_t d = 0; d < num_docs; ++d) {
      const Document& doc = corpus.docs[d];
      auto& zs = result.assignments[d];
      auto& dk = doc_topic[d];
      if (kind == ModelKind::kLda) {
        for (size_t i = 0; i < doc.token_ids.size(); ++i) {
          const int32_t w = doc.token_ids[i];
          const int32_t old_z = zs[i];
          dk[old_z] -= 1;
          model.word_topic.add(w, old_z, -1);
          model.topic_totals[old_z] -= 1;

          lda_conditional(model, dk, w, weights);
          const int32_t new_z = sample_discrete(weights, rng);

          zs[i] = new_z;
          dk[new_z] += 1;
          model.word_topic.add(w, new_z, 1);
          model.topic_totals[new_z] += 1;
        }
      } else {
        for (int32_t s = 0; s < doc.num_sentences(); ++s) {
          const auto sentence = doc.sentence(s);
          const int32_t old_z = zs[s];
          dk[old_z] -= 1;
          for (int32_t w : sentence) {
            model.word_topic.add(w, old_z, -1);
            model.topic_totals[old_z] -= 1;
          }

          slda_conditional_log(model, dk, sentence, weights);
          log_weights_to_probs(weights);
          const int32_t new_z = sample_discrete(weights, 1.0, rng);

          zs[s] = new_z;
          dk[new_z] += 1;
          for (int32_t w : sentence) {
            model.word_topic.add(w, new_z, 1);
            model.topic_totals[new_z] += 1;
          }
        }
      }
    }
  }
  return result;
}

namespace detail {

inline void check_inferable(const TopicModel& model, const Document& doc) {
  if (doc.token_ids.empty()) throw Error("empty document: nothing to infer");
  for (int32_t w : doc.token_ids) {
    if (w < 0 || w >= model.vocab_size()) {
      throw Error("document/model vocabulary mismatch: token id out of range");
    }
  }
}

}  // namespace detail

// Frozen-model Gibbs inference: model counts stay fixed, only the doc-local
// topic counts evolve. Returns the average of (n_dk + alpha) / (T + K alpha)
// over the post-burn-in sweeps, T being the doc unit count (tokens for LDA,
// sentences for SentenceLDA).
inline TopicDistribution infer_gibbs(const TopicModel& model, const Document& doc,
                                     int32_t burn_in, int32_t samples, uint64_t seed) {
  detail::check_inferable(model, doc);
  if (burn_in < 0 || samples < 1) throw Error("infer_gibbs: need burn_in >= 0 and samples >= 1");

  const int32_t K = model.num_topics();
  const double alpha = model.params.alpha;
  const bool sentence_level = model.kind == ModelKind::kSentenceLda;
  const int32_t units = sentence_level ? doc.num_sentences() : doc.length();

  Rng rng(seed);
  std::vector<int32_t> zs(units);
  std::vector<int32_t> dk(K, 0);
  for (int32_t u = 0; u < units; ++u) {
    zs[u] = static_cast<int32_t>(rng.next_below(static_cast<uint32_t>(K)));
    dk[zs[u]] += 1;
  }

  std::vector<double> weights(K);
  std::vector<double> phi_col(K);
  std::vector<double> accum(K, 0.0);
  const double denom = units + K * alpha;

  for (int32_t sweep = 0; sweep < burn_in + samples; ++sweep) {
    for (int32_t u = 0; u < units; ++u) {
      dk[zs[u]] -= 1;
      if (sentence_level) {
        slda_conditional_log(model, dk, doc.sentence(u), weights);
        log_weights_to_probs(weights);
        zs[u] = sample_discrete(weights, 1.0, rng);
      } else {
        const int32_t w = doc.token_ids[u];
        model.phi_column(w, phi_col);
        for (int32_t k = 0; k < K; ++k) weights[k] = (dk[k] + alpha) * phi_col[k];
        zs[u] = sample_discrete(weights, rng);
      }
      dk[zs[u]] += 1;
    }
    if (sweep >= burn_in) {
      for (int32_t k = 0; k < K; ++k) accum[k] += (dk[k] + alpha) / denom;
    }
  }

  TopicDistribution p(K);
  for (int32_t k = 0; k < K; ++k) p[k] = accum[k] / samples;
  return p;
}

// min(1, [pi(proposed) q(current)] / [pi(current) q(proposed)]).
inline double mh_acceptance(double target_cur, double target_prop, double q_cur, double q_prop) {
  const double a = (target_prop * q_cur) / (target_cur * q_prop);
  return a < 1.0 ? a : 1.0;
}

// Metropolis-Hastings inference over a frozen LDA model, LightLDA style.
// Word proposals come from per-word alias tables over phi built once per
// model; doc proposals use the mixture trick, so no per-doc table is ever
// rebuilt. Proposal kinds alternate deterministically within mh_steps.
class MhSampler {
 public:
  explicit MhSampler(const TopicModel& model) : model_(&model) {
    if (model.kind != ModelKind::kLda) {
      throw Error("MH inference requires an LDA model");
    }
    model.params.validate();
    const int32_t K = model.num_topics();
    const int32_t V = model.vocab_size();
    std::vector<double> column(K);
    word_tables_.reserve(V);
    for (int32_t w = 0; w < V; ++w) {
      model.phi_column(w, column);
      word_tables_.emplace_back(column);
    }
  }

  TopicDistribution infer(const Document& doc, int32_t burn_in, int32_t samples,
                          int32_t mh_steps, uint64_t seed) const {
    const TopicModel& model = *model_;
    detail::check_inferable(model, doc);
    if (burn_in < 0 || samples < 1) throw Error("infer_mh: need burn_in >= 0 and samples >= 1");
    if (mh_steps < 1) throw Error("infer_mh: mh_steps must be >= 1");

    const int32_t K = model.num_topics();
    const double alpha = model.params.alpha;
    const int32_t L = doc.length();

    Rng rng(seed);
    std::vector<int32_t> zs(L);
    std::vector<int32_t> dk(K, 0);
    for (int32_t i = 0; i < L; ++i) {
      zs[i] = static_cast<int32_t>(rng.next_below(static_cast<uint32_t>(K)));
      dk[zs[i]] += 1;
    }

    std::vector<double> phi_col(K);
    std::vector<double> accum(K, 0.0);
    const double denom = L + K * alpha;

    for (int32_t sweep = 0; sweep < burn_in + samples; ++sweep) {
      for (int32_t i = 0; i < L; ++i) {
        const int32_t w = doc.token_ids[i];
        model.phi_column(w, phi_col);
        int32_t s = zs[i];
        dk[s] -= 1;  // target counts exclude the token being resampled

        for (int32_t step = 0; step < mh_steps; ++step) {
          if (step % 2 == 0) {
            // Word proposal: q(k) proportional to phi(k, w).
            const int32_t t = word_tables_[w].sample(rng);
            if (t != s) {
              const double pi_s = (dk[s] + alpha) * phi_col[s];
              const double pi_t = (dk[t] + alpha) * phi_col[t];
              const double a = mh_acceptance(pi_s, pi_t, phi_col[s], phi_col[t]);
              if (rng.next_double() < a) {
                s = t;
                zs[i] = s;
              }
            }
          } else {
            // Doc proposal: q(k) proportional to n_dk + alpha with the token
            // itself still counted, sampled via the mixture trick.
            int32_t t;
            const double u = rng.next_double() * (L + K * alpha);
            if (u < static_cast<double>(L)) {
              t = zs[rng.next_below(static_cast<uint32_t>(L))];
            } else {
              t = static_cast<int32_t>(rng.next_below(static_cast<uint32_t>(K)));
            }
            if (t != s) {
              const double pi_s = (dk[s] + alpha) * phi_col[s];
              const double pi_t = (dk[t] + alpha) * phi_col[t];
              const double q_s = dk[s] + 1 + alpha;  // zs[i] == s
              const double q_t = dk[t] + alpha;
              const double a = mh_acceptance(pi_s, pi_t, q_s, q_t);
              if (rng.next_double() < a) {
                s = t;
                zs[i] = s;
              }
            }
          }
        }

        zs[i] = s;
        dk[s] += 1;
      }
      if (sweep >= burn_in) {
        for (int32_t k = 0; k < K; ++k) accum[k] += (dk[k] + alpha) / denom;
      }
    }

    TopicDistribution p(K);
    for (int32_t k = 0; k < K; ++k) p[k] = accum[k] / samples;
    return p;
  }

 private:
  const TopicModel* model_;
  std::vector<AliasTable> word_tables_;
};

// Convenience wrapper; callers inferring many documents should keep one
// MhSampler alive instead of rebuilding the alias tables per call.
inline TopicDistribution infer_mh(const TopicModel& model, const Document& doc, int32_t burn_in,
                                  int32_t samples, int32_t mh_steps, uint64_t seed) {
  return MhSampler(model).infer(doc, burn_in, samples, mh_steps, seed);
}

}  // namespace familia
