#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "familia/error.hpp"

namespace familia {

inline std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> tokens;
  size_t i = 0;
  const size_t n = line.size();
  while (i < n) {
    while (i < n && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n')) ++i;
    size_t start = i;
    while (i < n && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '\n') ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

// Token ids are dense 0..V-1, assigned by descending corpus frequency with
// lexicographic tie-break.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int32_t> id_of;
  std::vector<int64_t> freq;

  int32_t size() const { return static_cast<int32_t>(tokens.size()); }
  bool empty() const { return tokens.empty(); }

  std::optional<int32_t> lookup(const std::string& token) const {
    auto it = id_of.find(token);
    if (it == id_of.end()) return std::nullopt;
    return it->second;
  }
};

struct Document {
  std::string doc_id;
  std::vector<int32_t> token_ids;
  // Ascending offsets partitioning token_ids into sentences; first entry is 0,
  // last entry is token_ids.size(). Every sentence is non-empty.
  std::vector<int32_t> sentence_bounds;

  int32_t length() const { return static_cast<int32_t>(token_ids.size()); }
  int32_t num_sentences() const { return static_cast<int32_t>(sentence_bounds.size()) - 1; }

  std::span<const int32_t> sentence(int32_t s) const {
    return std::span<const int32_t>(token_ids.data() + sentence_bounds[s],
                                    static_cast<size_t>(sentence_bounds[s + 1] - sentence_bounds[s]));
  }
};

struct Corpus {
  std::vector<Document> docs;
  Vocabulary vocab;
  int64_t skipped_docs = 0;  // input lines dropped because nothing survived encoding

  int64_t total_tokens() const {
    int64_t n = 0;
    for (const auto& d : docs) n += d.length();
    return n;
  }
};

// Sentence delimiters are standalone tokens.
inline const std::set<std::string>& default_sentence_delims() {
  static const std::set<std::string> delims = {".", "!", "?", "；", "。", "！", "？"};
  return delims;
}

inline Vocabulary build_vocabulary(const std::vector<std::string>& raw_docs, int64_t min_count,
                                   const std::unordered_set<std::string>* stopwords = nullptr) {
  if (raw_docs.empty()) throw Error("build_vocabulary: no input documents");
  if (min_count < 1) throw Error("build_vocabulary: min_count must be positive");

  std::unordered_map<std::string, int64_t> counts;
  for (const auto& line : raw_docs) {
    for (auto& tok : split_whitespace(line)) counts[std::move(tok)] += 1;
  }

  std::vector<std::pair<std::string, int64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [tok, c] : counts) {
    if (c < min_count) continue;
    if (stopwords != nullptr && stopwords->count(tok) > 0) continue;
    kept.emplace_back(tok, c);
  }
  if (kept.empty()) throw Error("build_vocabulary: empty vocabulary after filtering");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.tokens.reserve(kept.size());
  vocab.freq.reserve(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) {
    vocab.id_of.emplace(kept[i].first, static_cast<int32_t>(i));
    vocab.tokens.push_back(std::move(kept[i].first));
    vocab.freq.push_back(kept[i].second);
  }
  return vocab;
}

namespace detail {

// Shared encoder; returns nullopt when no in-vocabulary token survives.
inline std::optional<Document> encode_tokens(const std::vector<std::string>& raw_tokens,
                                             const Vocabulary& vocab,
                                             const std::set<std::string>& sentence_delims,
                                             std::string doc_id) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.sentence_bounds.push_back(0);
  for (const auto& tok : raw_tokens) {
    if (sentence_delims.count(tok) > 0) {
      if (static_cast<int32_t>(doc.token_ids.size()) > doc.sentence_bounds.back()) {
        doc.sentence_bounds.push_back(static_cast<int32_t>(doc.token_ids.size()));
      }
      continue;
    }
    if (auto id = vocab.lookup(tok)) doc.token_ids.push_back(*id);
  }
  if (doc.token_ids.empty()) return std::nullopt;
  if (doc.sentence_bounds.back() != static_cast<int32_t>(doc.token_ids.size())) {
    doc.sentence_bounds.push_back(static_cast<int32_t>(doc.token_ids.size()));
  }
  return doc;
}

}  // namespace detail

// Out-of-vocabulary tokens are dropped; delimiter tokens close the current
// sentence and are not emitted; empty sentences are elided.
inline Document encode_document(const std::string& line, const Vocabulary& vocab,
                                const std::set<std::string>& sentence_delims = default_sentence_delims(),
                                std::string doc_id = {}) {
  if (vocab.empty()) throw Error("encode_document: empty vocabulary");
  auto doc = detail::encode_tokens(split_whitespace(line), vocab, sentence_delims, std::move(doc_id));
  if (!doc) throw Error("empty document: no in-vocabulary tokens");
  return *doc;
}

// Corpus file: UTF-8, one document per line, "doc_id<TAB>token token ...".
// When vocab is null it is built from the token payloads first.
inline Corpus load_corpus(const std::string& path, const Vocabulary* vocab = nullptr,
                          int64_t min_count = 1,
                          const std::set<std::string>& sentence_delims = default_sentence_delims(),
                          const std::unordered_set<std::string>* stopwords = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);

  std::vector<std::string> doc_ids;
  std::vector<std::string> payloads;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("malformed corpus line " + std::to_string(line_no) + " in " + path +
                  ": missing TAB separator");
    }
    doc_ids.push_back(line.substr(0, tab));
    payloads.push_back(line.substr(tab + 1));
  }
  if (payloads.empty()) throw Error("corpus file is empty: " + path);

  Corpus corpus;
  corpus.vocab = (vocab != nullptr) ? *vocab : build_vocabulary(payloads, min_count, stopwords);
  corpus.docs.reserve(payloads.size());
  for (size_t i = 0; i < payloads.size(); ++i) {
    auto doc = detail::encode_tokens(split_whitespace(payloads[i]), corpus.vocab, sentence_delims,
                                     doc_ids[i]);
    if (doc) {
      corpus.docs.push_back(std::move(*doc));
    } else {
      ++corpus.skipped_docs;
    }
  }
  return corpus;
}

// Vocabulary file: "id<TAB>token<TAB>freq" lines, id ascending from 0.
inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary file: " + path);
  for (int32_t i = 0; i < vocab.size(); ++i) {
    out << i << '\t' << vocab.tokens[i] << '\t' << vocab.freq[i] << '\n';
  }
  if (!out) throw Error("I/O failure writing vocabulary file: " + path);
}

inline Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.size() != 3) {
      throw Error("malformed vocabulary line " + std::to_string(line_no) + " in " + path);
    }
    int32_t id = -1;
    int64_t freq = -1;
    try {
      id = static_cast<int32_t>(std::stol(fields[0]));
      freq = std::stoll(fields[2]);
    } catch (const std::exception&) {
      throw Error("malformed vocabulary line " + std::to_string(line_no) + " in " + path);
    }
    if (id != static_cast<int32_t>(line_no) - 1) {
      throw Error("vocabulary ids must ascend from 0 without gaps: " + path);
    }
    if (vocab.id_of.count(fields[1]) > 0) {
      throw Error("duplicate vocabulary token '" + fields[1] + "' in " + path);
    }
    vocab.id_of.emplace(fields[1], id);
    vocab.tokens.push_back(fields[1]);
    vocab.freq.push_back(freq);
  }
  if (vocab.empty()) throw Error("vocabulary file is empty: " + path);
  return vocab;
}

}  // namespace familia
