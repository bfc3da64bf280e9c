#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/sampler.hpp"
#include "familia/semantics.hpp"
#include "support/bars.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using familia::Document;
using familia::ModelKind;
using familia::TopicModel;
using support::make_doc;
using support::make_model;

TEST_CASE("lda conditional with one topic normalizes to certainty") {
  const auto model = make_model(1, 3, 0.7, 0.3, {{2}, {1}, {4}});
  std::vector<int32_t> dk = {5};
  std::vector<double> w(1);
  familia::lda_conditional(model, dk, 0, w);
  REQUIRE(w[0] > 0.0);
}

TEST_CASE("lda conditional is uniform when all counts are zero") {
  const auto model = make_model(2, 5, 0.5, 0.1, {});
  std::vector<int32_t> dk = {0, 0};
  std::vector<double> w(2);
  familia::lda_conditional(model, dk, 3, w);
  REQUIRE(w[0] == Catch::Approx(0.5 * 0.1 / 0.5).epsilon(1e-12));
  REQUIRE(w[0] == Catch::Approx(w[1]).epsilon(1e-12));
}

TEST_CASE("lda conditional matches hand-evaluated rationals") {
  // K=2, V=2, alpha=1, beta=1; token under resample is word 0.
  // n_kw[.][w0] = [3, 0], n_k = [4, 1], n_dk = [2, 0]
  // weight[0] = (2+1)(3+1)/(4+2) = 2, weight[1] = (0+1)(0+1)/(1+2) = 1/3.
  const auto model = make_model(2, 2, 1.0, 1.0, {{3, 0}, {1, 1}});
  REQUIRE(model.topic_totals[0] == 4);
  REQUIRE(model.topic_totals[1] == 1);
  std::vector<int32_t> dk = {2, 0};
  std::vector<double> w(2);
  familia::lda_conditional(model, dk, 0, w);
  REQUIRE(w[0] == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(w[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("positive weights always") {
  const auto model = make_model(4, 3, 0.01, 0.001, {{9, 0, 0, 0}, {0, 7, 0, 0}, {0, 0, 0, 2}});
  std::vector<int32_t> dk = {0, 0, 3, 0};
  std::vector<double> w(4);
  for (int32_t word = 0; word < 3; ++word) {
    familia::lda_conditional(model, dk, word, w);
    double sum = 0.0;
    for (double x : w) {
      REQUIRE(x > 0.0);
      sum += x;
    }
    for (double x : w) REQUIRE(x / sum <= 1.0 + 1e-12);
  }
}

TEST_CASE("slda conditional on a length-1 sentence equals the lda conditional") {
  const auto model = make_model(3, 4, 0.4, 0.25, {{5, 1, 0}, {0, 2, 2}, {1, 0, 7}, {3, 3, 3}});
  std::vector<int32_t> dk = {2, 1, 4};
  const std::vector<int32_t> sentence = {2};

  std::vector<double> lda_w(3), slda_w(3);
  familia::lda_conditional(model, dk, 2, lda_w);
  familia::slda_conditional_log(model, dk, sentence, slda_w);
  familia::log_weights_to_probs(slda_w);

  double sum = 0.0;
  for (double x : lda_w) sum += x;
  for (int k = 0; k < 3; ++k) {
    REQUIRE(slda_w[k] == Catch::Approx(lda_w[k] / sum).epsilon(1e-9));
  }
}

TEST_CASE("slda conditional with zeroed counts is uniform for a repeated-word sentence") {
  // K=2, sentence {w,w}, alpha=1, beta=0.5, V=2: per-topic weight
  // 1 * (0.5 * 1.5) / (1 * 2) regardless of k.
  const auto model = make_model(2, 2, 1.0, 0.5, {});
  std::vector<int32_t> dk = {0, 0};
  const std::vector<int32_t> sentence = {0, 0};
  std::vector<double> w(2);
  familia::slda_conditional_log(model, dk, sentence, w);
  familia::log_weights_to_probs(w);
  REQUIRE(w[0] == Catch::Approx(0.5).epsilon(1e-12));

  // Same state through the sequential Polya-urn oracle.
  const auto oracle = oracles::sentence_joint_weights(model, dk, sentence);
  REQUIRE(oracle[0] == Catch::Approx(0.5 * 1.5 / 2.0).epsilon(1e-12));
  REQUIRE(oracle[0] == Catch::Approx(oracle[1]).epsilon(1e-12));
}

TEST_CASE("slda conditional matches the sequential oracle on a messy state") {
  const auto model = make_model(3, 5, 0.3, 0.2,
                                {{4, 0, 1}, {0, 6, 0}, {2, 2, 2}, {0, 0, 5}, {1, 1, 0}});
  std::vector<int32_t> dk = {1, 3, 0};
  const std::vector<int32_t> sentence = {0, 2, 2, 4, 0, 0};

  std::vector<double> w(3);
  familia::slda_conditional_log(model, dk, sentence, w);
  familia::log_weights_to_probs(w);

  auto oracle = oracles::sentence_joint_weights(model, dk, sentence);
  double sum = 0.0;
  for (double x : oracle) sum += x;
  for (int k = 0; k < 3; ++k) {
    REQUIRE(w[k] == Catch::Approx(oracle[k] / sum).epsilon(1e-9));
  }
}

TEST_CASE("slda conditional with one topic normalizes to certainty") {
  const auto model = make_model(1, 3, 0.5, 0.2, {{4}, {1}, {2}});
  std::vector<int32_t> dk = {3};
  std::vector<double> w(1);
  familia::slda_conditional_log(model, dk, std::vector<int32_t>{0, 2, 2}, w);
  familia::log_weights_to_probs(w);
  REQUIRE(w[0] == 1.0);
}

TEST_CASE("slda conditional rejects empty sentences") {
  const auto model = make_model(2, 2, 1.0, 0.5, {});
  std::vector<int32_t> dk = {0, 0};
  std::vector<double> w(2);
  REQUIRE_THROWS_AS(familia::slda_conditional_log(model, dk, std::vector<int32_t>{}, w),
                    familia::Error);
}

namespace {

familia::Corpus tiny_corpus() {
  familia::Corpus corpus;
  corpus.vocab = familia::build_vocabulary({"a a b . c c c", "b b c . a"}, 1);
  corpus.docs.push_back(familia::encode_document("a a b . c c c", corpus.vocab, {"."}, "d0"));
  corpus.docs.push_back(familia::encode_document("b b c . a", corpus.vocab, {"."}, "d1"));
  return corpus;
}

}  // namespace

TEST_CASE("single-topic training recovers the smoothed unigram distribution") {
  const auto corpus = tiny_corpus();
  const auto trained = familia::train(corpus, {1, 1.0, 0.5}, ModelKind::kLda, 5, 42);
  const auto& model = trained.model;
  // Frequencies of the encoded corpus (delimiters never reach the counts).
  std::vector<int64_t> freq(corpus.vocab.size(), 0);
  for (const auto& doc : corpus.docs) {
    for (int32_t w : doc.token_ids) freq[w] += 1;
  }
  const double n = static_cast<double>(corpus.total_tokens());
  const double vbeta = corpus.vocab.size() * 0.5;
  for (int32_t w = 0; w < corpus.vocab.size(); ++w) {
    const double expected = (freq[w] + 0.5) / (n + vbeta);
    REQUIRE(model.phi(0, w) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("training is deterministic and conserves counts") {
  const auto corpus = tiny_corpus();
  for (const ModelKind kind : {ModelKind::kLda, ModelKind::kSentenceLda}) {
    const auto a = familia::train(corpus, {3, 0.8, 0.05}, kind, 20, 7);
    const auto b = familia::train(corpus, {3, 0.8, 0.05}, kind, 20, 7);
    REQUIRE(a.assignments == b.assignments);
    REQUIRE(a.model.topic_totals == b.model.topic_totals);
    for (int32_t w = 0; w < corpus.vocab.size(); ++w) {
      const auto ca = a.model.word_topic.column(w);
      const auto cb = b.model.word_topic.column(w);
      REQUIRE(std::vector(ca.begin(), ca.end()) == std::vector(cb.begin(), cb.end()));
    }
    REQUIRE(a.model.total_count() == corpus.total_tokens());
    REQUIRE_NOTHROW(a.model.validate());

    const auto c = familia::train(corpus, {3, 0.8, 0.05}, kind, 20, 8);
    REQUIRE(a.assignments != c.assignments);
  }
}

TEST_CASE("phi rows are distributions after training") {
  const auto corpus = tiny_corpus();
  const auto trained = familia::train(corpus, {4, 0.5, 0.1}, ModelKind::kLda, 10, 3);
  for (int32_t k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (int32_t w = 0; w < corpus.vocab.size(); ++w) sum += trained.model.phi(k, w);
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("training rejects degenerate inputs") {
  const auto corpus = tiny_corpus();
  REQUIRE_THROWS_AS(familia::train(corpus, {0, 1.0, 0.1}, ModelKind::kLda, 5, 1), familia::Error);
  REQUIRE_THROWS_AS(familia::train(familia::Corpus{}, {2, 1.0, 0.1}, ModelKind::kLda, 5, 1),
                    familia::Error);
  REQUIRE_THROWS_AS(familia::train(corpus, {2, 1.0, 0.1}, ModelKind::kLda, 0, 1), familia::Error);
}

TEST_CASE("gibbs inference with one topic is certain") {
  const auto model = make_model(1, 3, 0.5, 0.1, {{2}, {3}, {1}});
  const auto p = familia::infer_gibbs(model, make_doc({0, 1, 2}), 10, 10, 42);
  REQUIRE(p.size() == 1);
  REQUIRE(p[0] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gibbs inference locks onto a topic that owns all phi mass") {
  // Topics 0..2 put their mass on a dump word the document never uses, so
  // the document's words have phi mass only in topic 3 (up to tiny beta):
  // p[3] >= L / (L + K alpha).
  const int32_t K = 4;
  const double alpha = 0.5;
  const auto model = make_model(K, 3, alpha, 1e-9,
                                {{0, 0, 0, 50}, {0, 0, 0, 50}, {100, 100, 100, 0}});
  const auto doc = make_doc({0, 1, 0, 1, 0, 1});
  const auto p = familia::infer_gibbs(model, doc, 20, 50, 42);
  const double L = 6.0;
  REQUIRE(p[3] >= L / (L + K * alpha));
}

TEST_CASE("gibbs inference matches the enumeration oracle on a tiny instance") {
  const auto model = make_model(2, 2, 3.0, 0.25, {{30, 2}, {3, 10}});
  const auto doc = make_doc({0, 1});
  const auto exact = oracles::exact_posterior_mean(model, doc.token_ids);
  const auto p = familia::infer_gibbs(model, doc, 200, 800, 42);
  REQUIRE(oracles::total_variation(p, exact) < 0.02);
}

TEST_CASE("gibbs inference validates the document") {
  const auto model = make_model(2, 2, 0.5, 0.5, {{3, 1}, {1, 3}});
  REQUIRE_THROWS_WITH(familia::infer_gibbs(model, Document{}, 10, 10, 1),
                      Catch::Matchers::ContainsSubstring("empty document"));
  REQUIRE_THROWS_WITH(familia::infer_gibbs(model, make_doc({0, 5}), 10, 10, 1),
                      Catch::Matchers::ContainsSubstring("vocabulary mismatch"));
}

TEST_CASE("sentence-level inference uses the sentence conditional") {
  const auto model = make_model(2, 3, 0.5, 0.2, {{6, 0}, {0, 6}, {2, 2}},
                                ModelKind::kSentenceLda);
  Document doc;
  doc.doc_id = "s";
  doc.token_ids = {0, 0, 2, 1, 1};
  doc.sentence_bounds = {0, 3, 5};
  const auto p = familia::infer_gibbs(model, doc, 50, 200, 42);
  REQUIRE(p.size() == 2);
  REQUIRE(p[0] + p[1] == Catch::Approx(1.0).margin(1e-9));
  // First sentence is word-0 heavy, second word-1 heavy; neither dominates.
  REQUIRE(p[0] > 0.2);
  REQUIRE(p[1] > 0.2);
}

TEST_CASE("mh acceptance is exactly one when the proposal equals the target") {
  // Degenerate state: single-word vocabulary makes phi identically 1, and a
  // uniform doc makes the target flat, so proposal == target.
  const double alpha = 0.3;
  const double pi_s = (1 + alpha) * 1.0;
  const double pi_t = (1 + alpha) * 1.0;
  REQUIRE(familia::mh_acceptance(pi_s, pi_t, 1.0, 1.0) == 1.0);

  // Proposal proportional to target with the same stored values.
  familia::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double a = 0.01 + rng.next_double();
    const double b = 0.01 + rng.next_double();
    REQUIRE(familia::mh_acceptance(a, b, a, b) == 1.0);
  }
}

TEST_CASE("mh inference with one topic is certain") {
  const auto model = make_model(1, 3, 0.5, 0.1, {{2}, {3}, {1}});
  const auto p = familia::infer_mh(model, make_doc({0, 1, 2}), 10, 10, 2, 42);
  REQUIRE(p.size() == 1);
  REQUIRE(p[0] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mh inference matches the enumeration oracle on a tiny instance") {
  const auto model = make_model(2, 2, 3.0, 0.25, {{30, 2}, {3, 10}});
  const auto doc = make_doc({0, 1});
  const auto exact = oracles::exact_posterior_mean(model, doc.token_ids);
  const auto p = familia::infer_mh(model, doc, 200, 800, 2, 42);
  REQUIRE(oracles::total_variation(p, exact) < 0.03);
}

TEST_CASE("mh inference is deterministic and rejects sentence models") {
  const auto model = make_model(2, 2, 0.5, 0.5, {{3, 1}, {1, 3}});
  const auto doc = make_doc({0, 1, 1});
  const auto a = familia::infer_mh(model, doc, 50, 100, 2, 9);
  const auto b = familia::infer_mh(model, doc, 50, 100, 2, 9);
  REQUIRE(a == b);

  const auto slda = make_model(2, 2, 0.5, 0.5, {{3, 1}, {1, 3}}, ModelKind::kSentenceLda);
  REQUIRE_THROWS_AS(familia::MhSampler(slda), familia::Error);
}

TEST_CASE("gibbs and mh agree on held-out bars documents") {
  const auto data = bars::make_corpus(120, 40, 11);
  const auto trained =
      familia::train(data.corpus, {bars::kTopics, 1.0, 0.01}, ModelKind::kLda, 80, 42);
  const auto docs = bars::make_heldout_docs(3, 40, 12, data.corpus.vocab);
  const familia::MhSampler mh(trained.model);
  double mean_jsd = 0.0;
  for (size_t i = 0; i < docs.size(); ++i) {
    const auto pg = familia::infer_gibbs(trained.model, docs[i], 150, 500,
                                         familia::derive_seed(1, i));
    const auto pm = mh.infer(docs[i], 150, 500, 2, familia::derive_seed(2, i));
    mean_jsd += familia::jensen_shannon_divergence(pg, pm);
  }
  mean_jsd /= static_cast<double>(docs.size());
  REQUIRE(mean_jsd < 0.1);
}
