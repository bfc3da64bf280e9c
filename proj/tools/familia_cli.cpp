// familia: topic-model training, inference and semantic matching from the
// command line. Results go to stdout as TSV, diagnostics to stderr.
// Exit codes: 0 success, 1 usage error, 2 data/model error.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "familia/familia.hpp"

namespace {

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::vector<double> parse_comma_doubles(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw familia::Error("malformed number in list: '" + item + "'");
    }
  }
  if (values.empty()) throw familia::Error("empty number list");
  return values;
}

std::set<std::string> parse_delims(const std::string& text) {
  std::set<std::string> delims;
  for (auto& tok : familia::split_whitespace(text)) delims.insert(tok);
  return delims;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw familia::Error("cannot open stopword file: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& tok : familia::split_whitespace(line)) words.insert(tok);
  }
  return words;
}

int num_threads() {
  const char* env = std::getenv("FAMILIA_NUM_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : (n > 256 ? 256 : n);
}

// Reads "doc_id<TAB>p0<TAB>p1..." lines, the format `infer` emits.
std::vector<std::pair<std::string, familia::TopicDistribution>> load_distribution_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw familia::Error("cannot open distribution file: " + path);
  std::vector<std::pair<std::string, familia::TopicDistribution>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = familia::split_whitespace(line);
    if (fields.size() < 2) {
      throw familia::Error("malformed distribution line " + std::to_string(line_no) + " in " + path);
    }
    familia::TopicDistribution p;
    p.reserve(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); ++i) {
      try {
        p.push_back(std::stod(fields[i]));
      } catch (const std::exception&) {
        throw familia::Error("malformed distribution line " + std::to_string(line_no) + " in " +
                             path);
      }
    }
    rows.emplace_back(fields[0], std::move(p));
  }
  if (rows.empty()) throw familia::Error("distribution file is empty: " + path);
  return rows;
}

familia::Vocabulary vocabulary_of_table(const familia::EmbeddingTable& table) {
  familia::Vocabulary vocab;
  vocab.tokens = table.word_names;
  vocab.id_of = table.word_ids;
  vocab.freq.assign(table.word_names.size(), 0);
  return vocab;
}

struct CommonFlags {
  uint64_t seed = 42;
  std::string delims = ". ! ? ； 。 ！ ？";
};

struct TrainOpts : CommonFlags {
  std::string corpus_path, out_dir, kind = "lda", stopword_path;
  int32_t topics = 0;
  double alpha = 0.0;  // 0 means 50/K
  double beta = 0.01;
  int32_t iters = 200;
  int64_t min_count = 1;
};

int run_train(const TrainOpts& opt) {
  std::unordered_set<std::string> stopwords;
  const std::unordered_set<std::string>* stop_ptr = nullptr;
  if (!opt.stopword_path.empty()) {
    stopwords = load_stopwords(opt.stopword_path);
    stop_ptr = &stopwords;
  }
  const auto corpus = familia::load_corpus(opt.corpus_path, nullptr, opt.min_count,
                                           parse_delims(opt.delims), stop_ptr);
  std::cerr << "corpus: " << corpus.docs.size() << " docs, V=" << corpus.vocab.size()
            << ", tokens=" << corpus.total_tokens() << ", skipped=" << corpus.skipped_docs << "\n";

  const auto params = familia::default_params(opt.topics, opt.alpha, opt.beta);
  const auto kind = familia::model_kind_from_string(opt.kind);
  const auto trained = familia::train(corpus, params, kind, opt.iters, opt.seed);
  familia::save_model(trained.model, opt.out_dir);
  std::cerr << "model written to " << opt.out_dir << "\n";
  return 0;
}

struct InferOpts : CommonFlags {
  std::string model_dir, method = "gibbs", doc_text, input_path;
  int32_t burn_in = 100, samples = 400, mh_steps = 2;
};

int run_infer(const InferOpts& opt) {
  const auto model = familia::load_model(opt.model_dir);
  const bool use_mh = opt.method == "mh";
  if (!use_mh && opt.method != "gibbs") {
    throw familia::Error("unknown inference method: " + opt.method);
  }
  // Validated here so worker threads cannot throw.
  if (opt.burn_in < 0 || opt.samples < 1) {
    throw familia::Error("infer: need --burn-in >= 0 and --samples >= 1");
  }
  if (use_mh && opt.mh_steps < 1) throw familia::Error("infer: --mh-steps must be >= 1");
  std::optional<familia::MhSampler> mh;
  if (use_mh) mh.emplace(model);
  const auto delims = parse_delims(opt.delims);

  auto infer_one = [&](const familia::Document& doc, uint64_t seed) {
    return use_mh ? mh->infer(doc, opt.burn_in, opt.samples, opt.mh_steps, seed)
                  : familia::infer_gibbs(model, doc, opt.burn_in, opt.samples, seed);
  };
  auto format_row = [&](const std::string& id, const familia::TopicDistribution& p) {
    std::string row = id;
    for (double x : p) {
      row += '\t';
      row += fmt6(x);
    }
    row += '\n';
    return row;
  };

  if (opt.doc_text.empty() && opt.input_path.empty()) {
    throw familia::Error("infer: need --doc or --input");
  }
  if (!opt.doc_text.empty()) {
    // Single inline document.
    const auto doc = familia::encode_document(opt.doc_text, model.vocab, delims, "-");
    std::cout << format_row(doc.doc_id, infer_one(doc, familia::derive_seed(opt.seed, 0)));
    return 0;
  }

  // Batch over a corpus file; output keeps input order regardless of workers.
  std::ifstream in(opt.input_path);
  if (!in) throw familia::Error("cannot open corpus file: " + opt.input_path);
  std::vector<std::string> ids, payloads;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw familia::Error("malformed corpus line " + std::to_string(line_no) + " in " +
                           opt.input_path + ": missing TAB separator");
    }
    ids.push_back(line.substr(0, tab));
    payloads.push_back(line.substr(tab + 1));
  }
  if (ids.empty()) throw familia::Error("corpus file is empty: " + opt.input_path);

  std::vector<std::string> rows(ids.size());
  std::vector<char> skipped(ids.size(), 0);
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (size_t i = cursor.fetch_add(1); i < ids.size(); i = cursor.fetch_add(1)) {
      auto doc = familia::detail::encode_tokens(familia::split_whitespace(payloads[i]),
                                                model.vocab, delims, ids[i]);
      if (!doc) {
        skipped[i] = 1;
        continue;
      }
      rows[i] = format_row(ids[i], infer_one(*doc, familia::derive_seed(opt.seed, i)));
    }
  };
  const int workers = num_threads();
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  size_t skip_count = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (skipped[i]) {
      ++skip_count;
      std::cerr << "warning: skipping empty document '" << ids[i] << "'\n";
      continue;
    }
    std::cout << rows[i];
  }
  if (skip_count > 0) std::cerr << "skipped " << skip_count << " empty documents\n";
  return 0;
}

struct TweTrainOpts : CommonFlags {
  std::string corpus_path, out_path, model_out_dir, stopword_path;
  int32_t topics = 0;
  double alpha = 0.0, beta = 0.01;
  int32_t lda_iters = 200;
  familia::TweConfig twe;
  int64_t min_count = 1;
};

int run_twe_train(const TweTrainOpts& opt) {
  std::unordered_set<std::string> stopwords;
  const std::unordered_set<std::string>* stop_ptr = nullptr;
  if (!opt.stopword_path.empty()) {
    stopwords = load_stopwords(opt.stopword_path);
    stop_ptr = &stopwords;
  }
  const auto corpus = familia::load_corpus(opt.corpus_path, nullptr, opt.min_count,
                                           parse_delims(opt.delims), stop_ptr);
  std::cerr << "corpus: " << corpus.docs.size() << " docs, V=" << corpus.vocab.size() << "\n";

  const auto params = familia::default_params(opt.topics, opt.alpha, opt.beta);
  const auto trained =
      familia::train(corpus, params, familia::ModelKind::kLda, opt.lda_iters, opt.seed);
  std::cerr << "topic annotation done (" << opt.lda_iters << " sweeps)\n";
  if (!opt.model_out_dir.empty()) familia::save_model(trained.model, opt.model_out_dir);

  const auto result = familia::train_twe(corpus, trained.assignments, opt.topics, opt.twe,
                                         familia::derive_seed(opt.seed, 1));
  for (size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::cerr << "epoch " << (e + 1) << " mean pair loss " << result.epoch_losses[e] << "\n";
  }
  familia::save_embeddings(result.table, opt.out_path);
  std::cerr << "embeddings written to " << opt.out_path << "\n";
  return 0;
}

struct TopicWordsOpts {
  std::string model_dir;
  int32_t topic = 0, top_n = 10;
};

int run_topic_words(const TopicWordsOpts& opt) {
  const auto model = familia::load_model(opt.model_dir);
  for (const auto& [token, phi] : familia::topic_top_words(model, opt.topic, opt.top_n)) {
    std::cout << token << '\t' << fmt6(phi) << '\n';
  }
  return 0;
}

struct WordTopicsOpts {
  std::string model_dir, word;
};

int run_word_topics(const WordTopicsOpts& opt) {
  const auto model = familia::load_model(opt.model_dir);
  const auto id = model.vocab.lookup(opt.word);
  if (!id) throw familia::Error("word not in model vocabulary: " + opt.word);
  const auto p = familia::word_topic_distribution(model, *id);
  for (size_t k = 0; k < p.size(); ++k) std::cout << k << '\t' << fmt6(p[k]) << '\n';
  return 0;
}

struct NearestOpts {
  std::string embeddings_path, query;
  int32_t top_n = 10;
};

int run_nearest(const NearestOpts& opt) {
  const auto table = familia::load_embeddings(opt.embeddings_path);
  for (const auto& [token, cosine] : familia::nearest_words(table, opt.query, opt.top_n)) {
    std::cout << token << '\t' << fmt6(cosine) << '\n';
  }
  return 0;
}

struct EntropyOpts {
  std::string dist_text, input_path;
};

int run_entropy(const EntropyOpts& opt) {
  if (!opt.dist_text.empty()) {
    std::cout << fmt6(familia::topic_entropy(parse_comma_doubles(opt.dist_text))) << '\n';
    return 0;
  }
  if (opt.input_path.empty()) throw familia::Error("entropy: need --p or --input");
  for (const auto& [id, p] : load_distribution_file(opt.input_path)) {
    std::cout << id << '\t' << fmt6(familia::topic_entropy(p)) << '\n';
  }
  return 0;
}

struct MatchOpts : CommonFlags {
  std::string metric;
  std::string p_text, q_text;             // hd / jsd / cos (numeric)
  std::string a_text, b_text;             // cos over short texts
  std::string embeddings_path;
  std::string model_dir, query, doc_text, dist_text, method = "gibbs";
  int32_t burn_in = 100, samples = 400, mh_steps = 2;
};

int run_match(const MatchOpts& opt) {
  if (opt.metric == "hd" || opt.metric == "jsd") {
    if (opt.p_text.empty() || opt.q_text.empty()) {
      throw familia::Error("match " + opt.metric + ": need --p and --q");
    }
    const auto p = parse_comma_doubles(opt.p_text);
    const auto q = parse_comma_doubles(opt.q_text);
    const double d = opt.metric == "hd" ? familia::hellinger_distance(p, q)
                                        : familia::jensen_shannon_divergence(p, q);
    std::cout << fmt6(d) << '\n';
    return 0;
  }
  if (opt.metric == "cos") {
    std::vector<double> a, b;
    if (!opt.embeddings_path.empty()) {
      if (opt.a_text.empty() || opt.b_text.empty()) {
        throw familia::Error("match cos: need --a and --b texts with --embeddings");
      }
      const auto table = familia::load_embeddings(opt.embeddings_path);
      a = familia::embed_short_text(familia::split_whitespace(opt.a_text), table);
      b = familia::embed_short_text(familia::split_whitespace(opt.b_text), table);
    } else {
      if (opt.a_text.empty() || opt.b_text.empty()) {
        throw familia::Error("match cos: need --a and --b (numeric lists, or texts with --embeddings)");
      }
      a = parse_comma_doubles(opt.a_text);
      b = parse_comma_doubles(opt.b_text);
    }
    std::cout << fmt6(familia::cosine_similarity(a, b)) << '\n';
    return 0;
  }
  if (opt.metric == "sl") {
    if (opt.model_dir.empty() || opt.query.empty()) {
      throw familia::Error("match sl: need --model and --query");
    }
    const auto model = familia::load_model(opt.model_dir);
    familia::TopicDistribution dist;
    if (!opt.dist_text.empty()) {
      dist = parse_comma_doubles(opt.dist_text);
    } else if (!opt.doc_text.empty()) {
      const auto doc =
          familia::encode_document(opt.doc_text, model.vocab, parse_delims(opt.delims), "-");
      dist = opt.method == "mh"
                 ? familia::infer_mh(model, doc, opt.burn_in, opt.samples, opt.mh_steps,
                                     familia::derive_seed(opt.seed, 0))
                 : familia::infer_gibbs(model, doc, opt.burn_in, opt.samples,
                                        familia::derive_seed(opt.seed, 0));
    } else {
      throw familia::Error("match sl: need --dist or --doc");
    }
    const auto result =
        familia::short_long_similarity(familia::split_whitespace(opt.query), dist, model);
    if (result.oov_skipped > 0) {
      std::cerr << "warning: " << result.oov_skipped << " query words out of vocabulary\n";
    }
    std::cout << fmt6(result.log_similarity);
    if (result.log_similarity >= -700.0) std::cout << '\t' << fmt6(std::exp(result.log_similarity));
    std::cout << '\n';
    return 0;
  }
  throw familia::Error("unknown match metric: " + opt.metric + " (expected cos|sl|hd|jsd)");
}

struct KeywordsOpts : CommonFlags {
  std::string model_dir, embeddings_path, doc_text, dist_text, method = "gibbs", stopword_path;
  int32_t top_n = 10, burn_in = 100, samples = 400, mh_steps = 2;
};

int run_keywords(const KeywordsOpts& opt) {
  const auto table = familia::load_embeddings(opt.embeddings_path);
  const auto delims = parse_delims(opt.delims);

  familia::TopicDistribution dist;
  if (!opt.dist_text.empty()) {
    dist = parse_comma_doubles(opt.dist_text);
  } else {
    if (opt.model_dir.empty()) throw familia::Error("keywords: need --model or --dist");
    const auto model = familia::load_model(opt.model_dir);
    const auto doc = familia::encode_document(opt.doc_text, model.vocab, delims, "-");
    dist = opt.method == "mh"
               ? familia::infer_mh(model, doc, opt.burn_in, opt.samples, opt.mh_steps,
                                   familia::derive_seed(opt.seed, 0))
               : familia::infer_gibbs(model, doc, opt.burn_in, opt.samples,
                                      familia::derive_seed(opt.seed, 0));
  }

  // Candidates are resolved against the embedding table's own vocabulary.
  const auto table_vocab = vocabulary_of_table(table);
  const auto doc = familia::encode_document(opt.doc_text, table_vocab, delims, "-");
  std::unordered_set<std::string> stopwords;
  const std::unordered_set<std::string>* stop_ptr = nullptr;
  if (!opt.stopword_path.empty()) {
    stopwords = load_stopwords(opt.stopword_path);
    stop_ptr = &stopwords;
  }
  for (const auto& kw : familia::keyword_scores(doc, dist, table, opt.top_n, stop_ptr)) {
    std::cout << kw.token << '\t' << fmt6(kw.score) << '\n';
  }
  return 0;
}

struct ClusterOpts : CommonFlags {
  std::string input_path;
  int32_t k = 0, max_iters = 100;
};

int run_cluster(const ClusterOpts& opt) {
  const auto rows = load_distribution_file(opt.input_path);
  std::vector<familia::TopicDistribution> dists;
  dists.reserve(rows.size());
  for (const auto& [id, p] : rows) dists.push_back(p);
  const auto clustering =
      familia::cluster_topic_distributions(dists, opt.k, opt.max_iters, opt.seed);
  for (size_t i = 0; i < rows.size(); ++i) {
    std::cout << rows[i].first << '\t' << clustering.assignments[i] << '\n';
  }
  std::cerr << "inertia " << clustering.inertia << " after " << clustering.inertia_history.size()
            << " iterations\n";
  return 0;
}

struct SvdfTrainOpts : CommonFlags {
  std::string data_path, out_path;
  familia::SvdfConfig cfg;
};

int run_svdf_train(const SvdfTrainOpts& opt) {
  familia::FeatureDims dims;
  const auto data = familia::load_interactions(opt.data_path, &dims);
  const auto result = familia::svdf_train(data, dims, opt.cfg, opt.seed);
  for (size_t e = 0; e < result.epoch_rmse.size(); ++e) {
    std::cerr << "epoch " << (e + 1) << " rmse " << result.epoch_rmse[e] << "\n";
  }
  familia::save_svdf_model(result.model, opt.out_path);
  std::cerr << "model written to " << opt.out_path << "\n";
  return 0;
}

struct SvdfPredictOpts {
  std::string model_path, data_path;
};

int run_svdf_predict(const SvdfPredictOpts& opt) {
  const auto model = familia::load_svdf_model(opt.model_path);
  for (const auto& x : familia::load_interactions(opt.data_path)) {
    std::cout << fmt6(familia::svdf_predict(model, x)) << '\n';
  }
  return 0;
}

struct SvdfEvalOpts {
  std::string model_path, data_path;
  int32_t top_n = 5;
};

// Ranking file: "user_id item_id y | g ... | u ... | i ..." per line; the
// target doubles as the relevance label.
int run_svdf_eval(const SvdfEvalOpts& opt) {
  const auto model = familia::load_svdf_model(opt.model_path);
  std::ifstream in(opt.data_path);
  if (!in) throw familia::Error("cannot open ranking file: " + opt.data_path);
  std::map<std::string, std::vector<familia::RankedCandidate>> per_user;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string user_id;
    int32_t item_id;
    if (!(ss >> user_id >> item_id)) {
      throw familia::Error("malformed ranking line " + std::to_string(line_no));
    }
    std::string rest;
    std::getline(ss, rest);
    familia::RankedCandidate cand;
    cand.item_id = item_id;
    cand.interaction = familia::parse_interaction(rest, line_no);
    cand.relevance = cand.interaction.target;
    per_user[user_id].push_back(std::move(cand));
  }
  if (per_user.empty()) throw familia::Error("ranking file is empty: " + opt.data_path);
  const auto metrics = familia::evaluate_ranking(model, per_user, opt.top_n);
  std::cout << "precision@" << opt.top_n << '\t' << fmt6(metrics.precision_at_n) << '\n';
  std::cout << "ndcg@" << opt.top_n << '\t' << fmt6(metrics.ndcg_at_n) << '\n';
  return 0;
}

void add_seed_flag(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "RNG seed")->capture_default_str();
}

void add_delims_flag(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--delims", flags.delims,
                  "sentence delimiter tokens, whitespace separated")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"familia: industrial topic modeling toolkit"};
  app.require_subcommand(1);

  TrainOpts train_opt;
  auto* train_cmd = app.add_subcommand("train", "train an LDA or SentenceLDA model");
  train_cmd->add_option("--corpus", train_opt.corpus_path, "corpus file (doc_id<TAB>tokens)")
      ->required();
  train_cmd->add_option("--out", train_opt.out_dir, "output model directory")->required();
  train_cmd->add_option("--kind", train_opt.kind, "model kind: lda|slda")->capture_default_str();
  train_cmd->add_option("--topics", train_opt.topics, "number of topics K")->required();
  train_cmd->add_option("--alpha", train_opt.alpha, "document-topic prior (default 50/K)");
  train_cmd->add_option("--beta", train_opt.beta, "topic-word prior")->capture_default_str();
  train_cmd->add_option("--iters", train_opt.iters, "Gibbs sweeps")->capture_default_str();
  train_cmd->add_option("--min-count", train_opt.min_count, "vocabulary frequency cutoff")
      ->capture_default_str();
  train_cmd->add_option("--stopwords", train_opt.stopword_path, "stopword file, one per line");
  add_seed_flag(train_cmd, train_opt);
  add_delims_flag(train_cmd, train_opt);

  InferOpts infer_opt;
  auto* infer_cmd = app.add_subcommand("infer", "infer topic distributions for documents");
  infer_cmd->add_option("--model", infer_opt.model_dir, "model directory")->required();
  infer_cmd->add_option("--method", infer_opt.method, "gibbs|mh")->capture_default_str();
  infer_cmd->add_option("--doc", infer_opt.doc_text, "inline document tokens");
  infer_cmd->add_option("--input", infer_opt.input_path, "corpus file to infer in bulk");
  infer_cmd->add_option("--burn-in", infer_opt.burn_in, "burn-in sweeps")->capture_default_str();
  infer_cmd->add_option("--samples", infer_opt.samples, "post-burn-in sweeps averaged")
      ->capture_default_str();
  infer_cmd->add_option("--mh-steps", infer_opt.mh_steps, "MH proposals per token per sweep")
      ->capture_default_str();
  add_seed_flag(infer_cmd, infer_opt);
  add_delims_flag(infer_cmd, infer_opt);

  TweTrainOpts twe_opt;
  auto* twe_cmd = app.add_subcommand("twe-train",
                                     "train topical word embeddings (LDA annotation + skip-gram)");
  twe_cmd->add_option("--corpus", twe_opt.corpus_path, "corpus file")->required();
  twe_cmd->add_option("--out", twe_opt.out_path, "output embedding file")->required();
  twe_cmd->add_option("--topics", twe_opt.topics, "number of topics K")->required();
  twe_cmd->add_option("--alpha", twe_opt.alpha, "document-topic prior (default 50/K)");
  twe_cmd->add_option("--beta", twe_opt.beta, "topic-word prior")->capture_default_str();
  twe_cmd->add_option("--lda-iters", twe_opt.lda_iters, "annotation Gibbs sweeps")
      ->capture_default_str();
  twe_cmd->add_option("--save-model", twe_opt.model_out_dir, "also save the annotation model here");
  twe_cmd->add_option("--dim", twe_opt.twe.dim, "embedding dimension")->capture_default_str();
  twe_cmd->add_option("--window", twe_opt.twe.window, "context radius")->capture_default_str();
  twe_cmd->add_option("--negatives", twe_opt.twe.negatives, "negative samples per pair")
      ->capture_default_str();
  twe_cmd->add_option("--epochs", twe_opt.twe.epochs, "training epochs")->capture_default_str();
  twe_cmd->add_option("--step-size", twe_opt.twe.step_size, "initial SGD step size")
      ->capture_default_str();
  twe_cmd->add_option("--min-count", twe_opt.min_count, "vocabulary frequency cutoff")
      ->capture_default_str();
  twe_cmd->add_option("--stopwords", twe_opt.stopword_path, "stopword file");
  add_seed_flag(twe_cmd, twe_opt);
  add_delims_flag(twe_cmd, twe_opt);

  TopicWordsOpts tw_opt;
  auto* tw_cmd = app.add_subcommand("topic-words", "top words of a topic by phi");
  tw_cmd->add_option("--model", tw_opt.model_dir, "model directory")->required();
  tw_cmd->add_option("--topic", tw_opt.topic, "topic id")->required();
  tw_cmd->add_option("--top", tw_opt.top_n, "number of words")->capture_default_str();

  WordTopicsOpts wt_opt;
  auto* wt_cmd = app.add_subcommand("word-topics", "P(topic | word) for a vocabulary word");
  wt_cmd->add_option("--model", wt_opt.model_dir, "model directory")->required();
  wt_cmd->add_option("--word", wt_opt.word, "surface token")->required();

  NearestOpts near_opt;
  auto* near_cmd = app.add_subcommand("nearest", "nearest words by embedding cosine");
  near_cmd->add_option("--embeddings", near_opt.embeddings_path, "embedding file")->required();
  near_cmd->add_option("--query", near_opt.query, "word, or #topic_k for a topic")->required();
  near_cmd->add_option("--top", near_opt.top_n, "number of neighbours")->capture_default_str();

  EntropyOpts ent_opt;
  auto* ent_cmd = app.add_subcommand("entropy", "entropy of topic distributions");
  ent_cmd->add_option("--p", ent_opt.dist_text, "comma-separated distribution");
  ent_cmd->add_option("--input", ent_opt.input_path, "TSV distribution file (doc_id p0 p1 ...)");

  MatchOpts match_opt;
  auto* match_cmd = app.add_subcommand("match", "semantic matching: cos|sl|hd|jsd");
  match_cmd->add_option("metric", match_opt.metric, "cos|sl|hd|jsd")->required();
  match_cmd->add_option("--p", match_opt.p_text, "first distribution (hd/jsd)");
  match_cmd->add_option("--q", match_opt.q_text, "second distribution (hd/jsd)");
  match_cmd->add_option("--a", match_opt.a_text, "first vector or short text (cos)");
  match_cmd->add_option("--b", match_opt.b_text, "second vector or short text (cos)");
  match_cmd->add_option("--embeddings", match_opt.embeddings_path,
                        "embedding file; makes --a/--b short texts");
  match_cmd->add_option("--model", match_opt.model_dir, "model directory (sl)");
  match_cmd->add_option("--query", match_opt.query, "short text (sl)");
  match_cmd->add_option("--doc", match_opt.doc_text, "long text to infer (sl)");
  match_cmd->add_option("--dist", match_opt.dist_text, "long-text distribution (sl)");
  match_cmd->add_option("--method", match_opt.method, "gibbs|mh for --doc inference")
      ->capture_default_str();
  match_cmd->add_option("--burn-in", match_opt.burn_in, "burn-in sweeps")->capture_default_str();
  match_cmd->add_option("--samples", match_opt.samples, "averaged sweeps")->capture_default_str();
  match_cmd->add_option("--mh-steps", match_opt.mh_steps, "MH proposals per token")
      ->capture_default_str();
  add_seed_flag(match_cmd, match_opt);
  add_delims_flag(match_cmd, match_opt);

  KeywordsOpts kw_opt;
  auto* kw_cmd = app.add_subcommand("keywords", "semantic keyword extraction from a document");
  kw_cmd->add_option("--doc", kw_opt.doc_text, "document tokens")->required();
  kw_cmd->add_option("--embeddings", kw_opt.embeddings_path, "embedding file")->required();
  kw_cmd->add_option("--model", kw_opt.model_dir, "model directory (for inference)");
  kw_cmd->add_option("--dist", kw_opt.dist_text, "document distribution, skips inference");
  kw_cmd->add_option("--top", kw_opt.top_n, "number of keywords")->capture_default_str();
  kw_cmd->add_option("--method", kw_opt.method, "gibbs|mh")->capture_default_str();
  kw_cmd->add_option("--burn-in", kw_opt.burn_in, "burn-in sweeps")->capture_default_str();
  kw_cmd->add_option("--samples", kw_opt.samples, "averaged sweeps")->capture_default_str();
  kw_cmd->add_option("--mh-steps", kw_opt.mh_steps, "MH proposals per token")
      ->capture_default_str();
  kw_cmd->add_option("--stopwords", kw_opt.stopword_path, "stopword file");
  add_seed_flag(kw_cmd, kw_opt);
  add_delims_flag(kw_cmd, kw_opt);

  ClusterOpts cl_opt;
  auto* cl_cmd = app.add_subcommand("cluster", "k-means over topic distributions");
  cl_cmd->add_option("--input", cl_opt.input_path, "TSV distribution file")->required();
  cl_cmd->add_option("--k", cl_opt.k, "number of clusters")->required();
  cl_cmd->add_option("--max-iters", cl_opt.max_iters, "Lloyd iteration cap")->capture_default_str();
  add_seed_flag(cl_cmd, cl_opt);

  SvdfTrainOpts st_opt;
  auto* st_cmd = app.add_subcommand("svdf-train", "train feature-based matrix factorization");
  st_cmd->add_option("--data", st_opt.data_path, "interaction file")->required();
  st_cmd->add_option("--out", st_opt.out_path, "output model file")->required();
  st_cmd->add_option("--factors", st_opt.cfg.factor_dim, "latent factor dimension")
      ->capture_default_str();
  st_cmd->add_option("--epochs", st_opt.cfg.epochs, "SGD epochs")->capture_default_str();
  st_cmd->add_option("--step-size", st_opt.cfg.step_size, "SGD step size")->capture_default_str();
  st_cmd->add_option("--l2", st_opt.cfg.l2, "L2 regularization")->capture_default_str();
  add_seed_flag(st_cmd, st_opt);

  SvdfPredictOpts sp_opt;
  auto* sp_cmd = app.add_subcommand("svdf-predict", "predict targets for interactions");
  sp_cmd->add_option("--model", sp_opt.model_path, "model file")->required();
  sp_cmd->add_option("--data", sp_opt.data_path, "interaction file")->required();

  SvdfEvalOpts se_opt;
  auto* se_cmd = app.add_subcommand("svdf-eval", "Precision@n / NDCG@n ranking evaluation");
  se_cmd->add_option("--model", se_opt.model_path, "model file")->required();
  se_cmd->add_option("--data", se_opt.data_path, "ranking file (user item y | g | u | i)")
      ->required();
  se_cmd->add_option("--top", se_opt.top_n, "cutoff n")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train_cmd->parsed()) return run_train(train_opt);
    if (infer_cmd->parsed()) return run_infer(infer_opt);
    if (twe_cmd->parsed()) return run_twe_train(twe_opt);
    if (tw_cmd->parsed()) return run_topic_words(tw_opt);
    if (wt_cmd->parsed()) return run_word_topics(wt_opt);
    if (near_cmd->parsed()) return run_nearest(near_opt);
    if (ent_cmd->parsed()) return run_entropy(ent_opt);
    if (match_cmd->parsed()) return run_match(match_opt);
    if (kw_cmd->parsed()) return run_keywords(kw_opt);
    if (cl_cmd->parsed()) return run_cluster(cl_opt);
    if (st_cmd->parsed()) return run_svdf_train(st_opt);
    if (sp_cmd->parsed()) return run_svdf_predict(sp_opt);
    if (se_cmd->parsed()) return run_svdf_eval(se_opt);
  } catch (const familia::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
