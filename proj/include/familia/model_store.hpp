#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/topic_model.hpp"

namespace familia {

// On-disk model layout (UTF-8, LF, counts as decimal integers, floats with 17
// significant digits so they round-trip bit-exactly):
//   dir/model.meta      "kind K V alpha beta total_tokens" on one line
//   dir/word_topic.txt  one line per word id: "word_id k1:c1 k2:c2 ..." (k ascending)
//   dir/vocab.txt       "id<TAB>token<TAB>freq"
// Counts are stored rather than probabilities so beta can be changed at load
// time without retraining.

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

inline void save_model(const TopicModel& model, const std::string& dir) {
  model.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create model directory: " + dir);

  const std::string meta_path = dir + "/model.meta";
  {
    std::ofstream out(meta_path);
    if (!out) throw Error("cannot write " + meta_path);
    out << to_string(model.kind) << ' ' << model.num_topics() << ' ' << model.vocab_size() << ' '
        << detail::format_double(model.params.alpha) << ' '
        << detail::format_double(model.params.beta) << ' ' << model.total_count() << '\n';
    if (!out) throw Error("I/O failure writing " + meta_path);
  }

  const std::string wt_path = dir + "/word_topic.txt";
  {
    std::ofstream out(wt_path);
    if (!out) throw Error("cannot write " + wt_path);
    for (int32_t w = 0; w < model.vocab_size(); ++w) {
      out << w;
      for (const auto& [topic, count] : model.word_topic.column(w)) {
        out << ' ' << topic << ':' << count;
      }
      out << '\n';
    }
    if (!out) throw Error("I/O failure writing " + wt_path);
  }

  save_vocabulary(model.vocab, dir + "/vocab.txt");
}

inline TopicModel load_model(const std::string& dir) {
  const std::string meta_path = dir + "/model.meta";
  std::ifstream meta(meta_path);
  if (!meta) throw Error("missing model file: " + meta_path);

  TopicModel model;
  std::string kind_str;
  int64_t declared_total = -1;
  int32_t declared_v = -1;
  if (!(meta >> kind_str >> model.params.num_topics >> declared_v >> model.params.alpha >>
        model.params.beta >> declared_total)) {
    throw Error("corrupt model: cannot parse " + meta_path);
  }
  model.kind = model_kind_from_string(kind_str);
  model.params.validate();
  if (declared_v < 1) throw Error("corrupt model: vocabulary size must be >= 1");

  model.vocab = load_vocabulary(dir + "/vocab.txt");
  if (model.vocab.size() != declared_v) {
    throw Error("corrupt model: vocabulary size does not match header");
  }

  const std::string wt_path = dir + "/word_topic.txt";
  std::ifstream wt(wt_path);
  if (!wt) throw Error("missing model file: " + wt_path);

  model.word_topic = WordTopicCounts(declared_v);
  model.topic_totals.assign(model.params.num_topics, 0);

  std::string line;
  int32_t rows = 0;
  size_t line_no = 0;
  while (std::getline(wt, line)) {
    ++line_no;
    std::istringstream ss(line);
    int32_t word_id = -1;
    if (!(ss >> word_id)) throw Error("corrupt model: bad row at line " + std::to_string(line_no));
    if (word_id != rows) throw Error("corrupt model: word ids must ascend from 0");
    if (word_id >= declared_v) throw Error("corrupt model: word id exceeds declared vocabulary");
    std::string pair;
    int32_t prev_topic = -1;
    while (ss >> pair) {
      const size_t colon = pair.find(':');
      if (colon == std::string::npos) {
        throw Error("corrupt model: malformed count at line " + std::to_string(line_no));
      }
      int32_t topic;
      int64_t count;
      try {
        topic = static_cast<int32_t>(std::stol(pair.substr(0, colon)));
        count = std::stoll(pair.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error("corrupt model: malformed count at line " + std::to_string(line_no));
      }
      if (topic <= prev_topic) throw Error("corrupt model: topics must ascend within a row");
      if (topic >= model.params.num_topics) throw Error("corrupt model: topic id out of range");
      if (count <= 0 || count > std::numeric_limits<int32_t>::max()) {
        throw Error("corrupt model: counts must be positive 32-bit integers");
      }
      model.word_topic.add(word_id, topic, static_cast<int32_t>(count));
      model.topic_totals[topic] += count;
      prev_topic = topic;
    }
    ++rows;
  }
  if (rows != declared_v) throw Error("corrupt model: row count does not match declared vocabulary");
  if (model.total_count() != declared_total) {
    throw Error("corrupt model: counts do not match header total");
  }
  model.validate();
  return model;
}

// Top-n words of one topic by phi, ties broken by ascending word id.
inline std::vector<std::pair<std::string, double>> topic_top_words(const TopicModel& model,
                                                                   int32_t topic, int32_t n) {
  if (topic < 0 || topic >= model.num_topics()) throw Error("topic id out of range");
  if (n < 0) throw Error("topic_top_words: n must be >= 0");
  const int32_t V = model.vocab_size();
  std::vector<std::pair<int32_t, double>> scored(V);
  for (int32_t w = 0; w < V; ++w) scored[w] = {w, model.phi(topic, w)};
  const int32_t keep = std::min(n, V);
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (int32_t i = 0; i < keep; ++i) {
    out.emplace_back(model.vocab.tokens[scored[i].first], scored[i].second);
  }
  return out;
}

// P(z = k | w), proportional to n_kw + beta.
inline TopicDistribution word_topic_distribution(const TopicModel& model, int32_t word) {
  if (word < 0 || word >= model.vocab_size()) throw Error("word id out of range");
  const int32_t K = model.num_topics();
  TopicDistribution p(K, model.params.beta);
  for (const auto& [topic, count] : model.word_topic.column(word)) p[topic] += count;
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace familia
