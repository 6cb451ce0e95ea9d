#include <gtest/gtest.h>

#include <random>

#include "agrag/error.hpp"
#include "agrag/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace agrag;
using namespace agrag::eval;
using embedding::EmbeddingVector;

namespace {

std::shared_ptr<embedding::Embedder> embedder(std::size_t dim = 64, std::string model = "hash-trigram-v1") {
  embedding::EmbedderConfig c;
  c.dim = dim;
  c.model_name = std::move(model);
  return embedding::make_embedder(c);
}

KnowledgeBase kb_of(const std::vector<std::string>& texts, const embedding::Embedder& e) {
  std::vector<corpus::Chunk> chunks;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    chunks.push_back({"d" + std::to_string(i) + "#0", "d" + std::to_string(i), texts[i], {0, texts[i].size()}, 0});
  }
  return build_knowledge_base(chunks, e);
}

const std::vector<std::string> kWords = {"vaccine", "safety", "side",   "effects", "trust",  "government", "mandate",
                                         "freedom", "risk",   "benefit", "natural", "immunity", "pharma", "money",
                                         "data",    "fever",  "arm",     "dose",    "booster", "children"};

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) out += (i ? " " : "") + kWords[rng() % kWords.size()];
  return out;
}

std::vector<TopicList> published_rounds() {
  std::vector<TopicList> out;
  for (int i = 1; i <= 5; ++i) {
    const auto l = load_topic_lists(agrag::testing::fixture("published_rounds/round_" + std::to_string(i) + ".json"));
    out.insert(out.end(), l.begin(), l.end());
  }
  return out;
}

}  // namespace

TEST(Validity, HandArithmetic) {
  const auto [score, se] = weighted_relevance({{"a", 2, 0.5}, {"b", 6, 0.8}});
  EXPECT_EQ(score, (0.5 * 2 + 0.8 * 6) / 8);
  EXPECT_DOUBLE_EQ(score, 0.725);
  EXPECT_GT(se, 0.0);
  // Zero-count topics carry no weight.
  EXPECT_EQ(weighted_relevance({{"a", 2, 0.5}, {"z", 0, 0.0}, {"b", 6, 0.8}}).first, score);
  EXPECT_THROW(weighted_relevance({{"z", 0, 0.0}}), Error);
}

TEST(Validity, StandardErrorMatchesEqualWeightCase) {
  // Equal counts reduce the weighted SE to the ordinary SE of the means.
  const auto [score, se] = weighted_relevance({{"a", 3, 0.2}, {"b", 3, 0.4}, {"c", 3, 0.9}});
  const double mean = 0.5;
  const double sd = std::sqrt(((0.09) + (0.01) + (0.16)) / 2.0);
  EXPECT_NEAR(score, mean, 1e-15);
  EXPECT_NEAR(se, sd / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(weighted_relevance({{"only", 4, 0.6}}).second, 0.0);
}

TEST(Validity, MatchesBruteForceOracle) {
  std::mt19937_64 rng(21);
  const auto e = embedder();
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::string> docs;
    const std::size_t n = 1 + rng() % 50;
    for (std::size_t i = 0; i < n; ++i) docs.push_back(random_text(rng, 2 + rng() % 12));
    const auto kb = kb_of(docs, *e);
    TopicList topics{"m", {}};
    const std::size_t k = 1 + rng() % 6;
    for (std::size_t i = 0; i < k; ++i) topics.labels.push_back("Topic " + std::to_string(i + 1) + ": " + random_text(rng, 1 + rng() % 3));
    RetrievalParams p{0.05 + 0.3 * static_cast<double>(rng() % 100) / 100.0, 1 + rng() % 12};
    const auto vectors = embed_topics(topics.labels, *e);
    try {
      const auto report = validity(topics, kb, *e, p);
      EXPECT_NEAR(report.weighted_score, oracle::validity_score(vectors, *kb.store, p.floor, p.cap), 1e-12);
      for (const auto& t : report.per_topic) EXPECT_LE(t.retrieved_count, p.cap);
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::AllTopicsEmpty);
    }
  }
}

TEST(Validity, ReportFieldsAndAllEmpty) {
  const auto e = embedder();
  const auto kb = kb_of({"vaccine safety concerns", "fever after the dose", "trust in government"}, *e);
  const auto r = validity({"m", {"Topic 1: Vaccine Safety", "Quantum Chromodynamics"}}, kb, *e, {0.3, 100});
  EXPECT_EQ(r.per_topic[0].label, "Vaccine Safety");
  EXPECT_GT(r.per_topic[0].retrieved_count, 0u);
  EXPECT_EQ(r.empty_topics, std::vector<std::string>{"Quantum Chromodynamics"});
  EXPECT_EQ(r.eval_embedder, "hash-trigram-v1/64");
  EXPECT_FALSE(r.corpus_reembedded);
  EXPECT_THROW(validity({"m", {"zzzz qqqq"}}, kb, *e, {0.99, 10}), Error);
  // Removing the zero-retrieval topic leaves the score unchanged.
  EXPECT_EQ(validity({"m", {"Vaccine Safety"}}, kb, *e, {0.3, 100}).weighted_score, r.weighted_score);
}

TEST(Validity, ReembedsWhenIndexUsesAnotherEmbedder) {
  const auto index = embedder(32, "index-model");
  const auto eval_e = embedder(64);
  const std::vector<std::string> docs = {"vaccine safety concerns", "fever after the dose"};
  const auto kb = kb_of(docs, *index);
  const auto r = validity({"m", {"vaccine safety"}}, kb, *eval_e, {0.1, 10});
  EXPECT_TRUE(r.corpus_reembedded);
  EXPECT_EQ(r.weighted_score, validity({"m", {"vaccine safety"}}, kb_of(docs, *eval_e), *eval_e, {0.1, 10}).weighted_score);
}

TEST(Validity, CompareSortsAndIsDeterministic) {
  const auto e = embedder();
  const auto kb = kb_of({"vaccine safety concerns", "fever after the dose", "trust in government"}, *e);
  const std::vector<TopicList> lists = {{"weak", {"after the dose"}}, {"strong", {"vaccine safety concerns"}},
                                        {"strong_copy", {"vaccine safety concerns"}}};
  const auto reports = compare_methods(lists, kb, *e, {0.1, 10});
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].method_name, "strong");
  EXPECT_EQ(reports[1].method_name, "strong_copy");
  EXPECT_EQ(reports[0].weighted_score, reports[1].weighted_score);
  EXPECT_GE(reports[1].weighted_score, reports[2].weighted_score);
  EXPECT_EQ(validity_csv(reports).substr(0, 19), "method,score,stderr");
}

TEST(Reliability, ToyVectors) {
  const std::vector<EmbeddingVector> anchor = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1})};
  const std::vector<EmbeddingVector> other = {EmbeddingVector({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)})};
  std::vector<double> maxima;
  EXPECT_NEAR(directional_score(anchor, other, &maxima), 0.70710678118, 1e-10);
  EXPECT_EQ(maxima.size(), 2u);
  const std::vector<EmbeddingVector> ortho = {EmbeddingVector({0, 0, 1})};
  const std::vector<EmbeddingVector> base = {EmbeddingVector({1, 0, 0}), EmbeddingVector({0, 1, 0})};
  EXPECT_EQ(directional_score(base, ortho), 0.0);
}

TEST(Reliability, IdenticalRoundsScoreOne) {
  const auto e = embedder();
  const auto rounds = published_rounds();
  const auto r = reliability({rounds[0], rounds[0]}, *e);
  EXPECT_NEAR(r.scores_vs_anchor[0].score, 1.0, 1e-6);
  // Verbatim containment also gives 1.
  TopicList superset = rounds[0];
  superset.labels.push_back("Something Else");
  EXPECT_NEAR(reliability({rounds[0], superset}, *e).scores_vs_anchor[0].score, 1.0, 1e-6);
}

TEST(Reliability, PermutationInvariance) {
  const auto e = embedder();
  const auto rounds = published_rounds();
  const auto base = reliability(rounds, *e, 0, true);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = rounds;
    for (auto& r : shuffled) std::shuffle(r.labels.begin(), r.labels.end(), rng);
    const auto again = reliability(shuffled, *e, 0, true);
    for (std::size_t i = 0; i < base.scores_vs_anchor.size(); ++i) {
      EXPECT_EQ(again.scores_vs_anchor[i].score, base.scores_vs_anchor[i].score);
    }
    EXPECT_EQ(*again.full_matrix, *base.full_matrix);
  }
}

TEST(Reliability, PublishedRoundsShapeAndAnchor) {
  const auto e = embedder();
  const auto r = reliability(published_rounds(), *e, 0, true);
  ASSERT_EQ(r.scores_vs_anchor.size(), 4u);
  EXPECT_EQ(r.scores_vs_anchor[0].anchor, "round_1");
  EXPECT_EQ(r.scores_vs_anchor[3].other, "round_5");
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR((*r.full_matrix)[i][i], 1.0, 1e-6);
  for (const auto& p : r.scores_vs_anchor) {
    EXPECT_GE(p.score, -1.0);
    EXPECT_LE(p.score, 1.0);
    EXPECT_EQ(p.score, (*r.full_matrix)[0][&p - r.scores_vs_anchor.data() + 1]);
  }
  const auto from4 = reliability(published_rounds(), *e, 3);
  EXPECT_EQ(from4.scores_vs_anchor[0].anchor, "round_4");
  EXPECT_EQ(reliability_csv(r).substr(0, 17), "pair,score,stderr");
  EXPECT_THROW(reliability({published_rounds()[0]}, *e), Error);
}

TEST(TopicLists, LoadFormats) {
  agrag::testing::TempDir dir("lists");
  write_json_file(dir.path() / "a.json", json::array({{{"method_name", "x"}, {"labels", {"A"}}},
                                                     {{"method_name", "y"}, {"labels", {"B"}}}}));
  write_json_file(dir.path() / "b.json",
                  {{"round_number", 3}, {"topics", {{{"index", 1}, {"label", "C"}, {"word_count", 1},
                                                     {"violates_word_limit", false}}}},
                   {"transcript_ref", "r"}, {"config_hash", "h"}, {"config_snapshot", json::object()}, {"attempts", 1}});
  const auto lists = load_topic_lists_dir(dir.path());
  ASSERT_EQ(lists.size(), 3u);
  EXPECT_EQ(lists[1].method_name, "y");
  EXPECT_EQ(lists[2].method_name, "round_3");
  EXPECT_EQ(lists[2].labels, std::vector<std::string>{"C"});
  const auto lda = load_topic_lists(agrag::testing::fixture("methods/lda_published.json"));
  EXPECT_EQ(lda[0].labels.size(), 9u);
}
