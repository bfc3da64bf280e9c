#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "familia/model_store.hpp"
#include "familia/sampler.hpp"
#include "support/bars.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using support::make_doc;
using support::make_model;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("model round-trips bit-exactly") {
  const auto model = make_model(3, 4, 0.123456789012345, 0.01,
                                {{5, 0, 1}, {0, 2, 0}, {7, 0, 3}, {0, 0, 0}});
  const auto dir = temp_dir("familia_model_rt");
  familia::save_model(model, dir);
  const auto loaded = familia::load_model(dir);

  REQUIRE(loaded.params.num_topics == 3);
  REQUIRE(loaded.params.alpha == model.params.alpha);
  REQUIRE(loaded.params.beta == model.params.beta);
  REQUIRE(loaded.kind == model.kind);
  REQUIRE(loaded.topic_totals == model.topic_totals);
  for (int32_t w = 0; w < 4; ++w) {
    const auto a = model.word_topic.column(w);
    const auto b = loaded.word_topic.column(w);
    REQUIRE(std::vector(a.begin(), a.end()) == std::vector(b.begin(), b.end()));
    for (int32_t k = 0; k < 3; ++k) {
      REQUIRE(loaded.phi(k, w) == model.phi(k, w));  // bitwise
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("single-topic model round-trips phi exactly") {
  const auto model = make_model(1, 2, 1.0, 0.5, {{3}, {1}});
  const auto dir = temp_dir("familia_model_k1");
  familia::save_model(model, dir);
  const auto loaded = familia::load_model(dir);
  REQUIRE(loaded.phi(0, 0) == Catch::Approx((3 + 0.5) / (4 + 1.0)).epsilon(1e-15));
  REQUIRE(loaded.phi(0, 0) == model.phi(0, 0));
  REQUIRE(loaded.phi(0, 1) == model.phi(0, 1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("round-trip preserves inference output bitwise") {
  const auto data = bars::make_corpus(60, 30, 5);
  const auto trained =
      familia::train(data.corpus, familia::default_params(4), familia::ModelKind::kLda, 30, 42);
  const auto dir = temp_dir("familia_model_infer");
  familia::save_model(trained.model, dir);
  const auto loaded = familia::load_model(dir);

  const auto doc = bars::make_heldout_docs(1, 25, 8, data.corpus.vocab)[0];
  const auto before = familia::infer_gibbs(trained.model, doc, 50, 100, 31415);
  const auto after = familia::infer_gibbs(loaded, doc, 50, 100, 31415);
  REQUIRE(before == after);
  std::filesystem::remove_all(dir);
}

TEST_CASE("tampered counts are rejected as corrupt") {
  const auto model = make_model(2, 3, 0.5, 0.1, {{4, 0}, {2, 2}, {0, 6}});
  const auto dir = temp_dir("familia_model_tamper");
  familia::save_model(model, dir);

  // Alter one count in word_topic.txt.
  const auto wt_path = dir + "/word_topic.txt";
  std::ifstream in(wt_path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto pos = content.find("0:4");
  REQUIRE(pos != std::string::npos);
  content.replace(pos, 3, "0:5");
  std::ofstream out(wt_path);
  out << content;
  out.close();

  REQUIRE_THROWS_WITH(familia::load_model(dir), Catch::Matchers::ContainsSubstring("corrupt model"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing meta file is reported by name") {
  const auto model = make_model(2, 2, 0.5, 0.1, {{1, 0}, {0, 1}});
  const auto dir = temp_dir("familia_model_missing");
  familia::save_model(model, dir);
  std::filesystem::remove(dir + "/model.meta");
  REQUIRE_THROWS_WITH(familia::load_model(dir), Catch::Matchers::ContainsSubstring("model.meta"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown model kind is rejected") {
  const auto model = make_model(2, 2, 0.5, 0.1, {{1, 0}, {0, 1}});
  const auto dir = temp_dir("familia_model_kind");
  familia::save_model(model, dir);
  {
    std::ifstream in(dir + "/model.meta");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    content.replace(0, 3, "xyz");
    std::ofstream out(dir + "/model.meta");
    out << content;
  }
  REQUIRE_THROWS_WITH(familia::load_model(dir),
                      Catch::Matchers::ContainsSubstring("unknown model kind"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("topic_top_words ranks by phi with id tie-breaks") {
  // K=1 over {a:3, b:1}, beta=0.5: phi = [3.5/5, 1.5/5].
  const auto model = make_model(1, 2, 1.0, 0.5, {{3}, {1}});
  const auto top = familia::topic_top_words(model, 0, 2);
  REQUIRE(top.size() == 2);
  REQUIRE(top[0].first == "w0");
  REQUIRE(top[0].second == Catch::Approx(3.5 / 5.0).epsilon(1e-12));
  REQUIRE(top[1].second == Catch::Approx(1.5 / 5.0).epsilon(1e-12));

  // n > V clips to V entries.
  REQUIRE(familia::topic_top_words(model, 0, 10).size() == 2);

  // Equal counts tie-break by ascending word id.
  const auto tied = make_model(1, 3, 1.0, 0.5, {{2}, {2}, {2}});
  const auto words = familia::topic_top_words(tied, 0, 3);
  REQUIRE(words[0].first == "w0");
  REQUIRE(words[1].first == "w1");
  REQUIRE(words[2].first == "w2");

  REQUIRE_THROWS_AS(familia::topic_top_words(model, 5, 2), familia::Error);
}

TEST_CASE("bars topic top words land inside the matched bar") {
  const auto data = bars::make_corpus(400, 50, 21);
  const auto trained = familia::train(data.corpus, {bars::kTopics, 1.0, 0.01},
                                      familia::ModelKind::kLda, 150, 42);

  // Find the learned topic closest to true "row 0" and check its top words.
  const int32_t v = data.corpus.vocab.size();
  std::vector<double> row0 = data.true_topics[0];
  int best_k = 0;
  double best_d = 1e9;
  for (int32_t k = 0; k < bars::kTopics; ++k) {
    std::vector<double> phi_row(v);
    for (int32_t w = 0; w < v; ++w) phi_row[w] = trained.model.phi(k, w);
    const double d = oracles::l1_distance(phi_row, row0);
    if (d < best_d) {
      best_d = d;
      best_k = k;
    }
  }
  const auto top = familia::topic_top_words(trained.model, best_k, 5);
  int in_row = 0;
  for (const auto& [token, phi] : top) {
    for (int c = 0; c < bars::kGrid; ++c) {
      if (token == bars::grid_word(0, c)) ++in_row;
    }
  }
  REQUIRE(in_row == 5);
}

TEST_CASE("word_topic_distribution normalizes smoothed counts") {
  // All-zero counts: uniform.
  const auto zero = make_model(4, 2, 1.0, 0.5, {});
  const auto uniform = familia::word_topic_distribution(zero, 0);
  for (double x : uniform) REQUIRE(x == Catch::Approx(0.25).epsilon(1e-12));

  // counts [9,1] with tiny beta: ~[0.9, 0.1].
  const auto sharp = make_model(2, 1, 1.0, 1e-9, {{9, 1}});
  const auto p1 = familia::word_topic_distribution(sharp, 0);
  REQUIRE(p1[0] == Catch::Approx(0.9).margin(1e-6));
  REQUIRE(p1[1] == Catch::Approx(0.1).margin(1e-6));

  // counts [3,1], beta=0.5: [0.7, 0.3].
  const auto half = make_model(2, 1, 1.0, 0.5, {{3, 1}});
  const auto p2 = familia::word_topic_distribution(half, 0);
  REQUIRE(p2[0] == Catch::Approx(0.7).epsilon(1e-12));
  REQUIRE(p2[1] == Catch::Approx(0.3).epsilon(1e-12));

  REQUIRE_THROWS_AS(familia::word_topic_distribution(half, 3), familia::Error);
}
