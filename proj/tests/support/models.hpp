#pragma once

// Hand-built topic models with fixed count tables for oracle tests.

#include <string>
#include <vector>

#include "familia/topic_model.hpp"

namespace support {

// counts_by_word is V rows of K counts.
inline familia::TopicModel make_model(int32_t num_topics, int32_t vocab_size, double alpha,
                                      double beta,
                                      const std::vector<std::vector<int32_t>>& counts_by_word,
                                      familia::ModelKind kind = familia::ModelKind::kLda) {
  familia::TopicModel model;
  model.params = {num_topics, alpha, beta};
  model.kind = kind;
  model.word_topic = familia::WordTopicCounts(vocab_size);
  model.topic_totals.assign(num_topics, 0);
  for (int32_t w = 0; w < vocab_size; ++w) {
    model.vocab.tokens.push_back("w" + std::to_string(w));
    model.vocab.id_of.emplace(model.vocab.tokens.back(), w);
    int64_t freq = 0;
    for (int32_t k = 0; k < num_topics; ++k) {
      const int32_t c = counts_by_word.empty() ? 0 : counts_by_word[w][k];
      if (c != 0) {
        model.word_topic.add(w, k, c);
        model.topic_totals[k] += c;
        freq += c;
      }
    }
    model.vocab.freq.push_back(freq);
  }
  return model;
}

inline familia::Document make_doc(std::vector<int32_t> token_ids) {
  familia::Document doc;
  doc.doc_id = "test";
  doc.token_ids = std::move(token_ids);
  doc.sentence_bounds = {0, static_cast<int32_t>(doc.token_ids.size())};
  return doc;
}

}  // namespace support
