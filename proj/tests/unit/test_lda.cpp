#include <gtest/gtest.h>

#include <numeric>

#include "agrag/error.hpp"
#include "agrag/lda.hpp"
#include "oracles.hpp"

using namespace agrag;
using namespace agrag::lda;

TEST(Stem, GlossaryFamilyCollapses) {
  EXPECT_EQ(stem("fishing"), "fish");
  EXPECT_EQ(stem("fished"), "fish");
  EXPECT_EQ(stem("fisher"), "fish");
  EXPECT_EQ(stem("fish"), "fish");
}

TEST(Stem, RuleTable) {
  EXPECT_EQ(stem("classes"), "class");
  EXPECT_EQ(stem("policies"), "policy");
  EXPECT_EQ(stem("meetings"), "meet");
  EXPECT_EQ(stem("running"), "run");
  EXPECT_EQ(stem("falling"), "fall");
  EXPECT_EQ(stem("reportedly"), "report");
  EXPECT_EQ(stem("workers"), "work");
  EXPECT_EQ(stem("quickly"), "quick");
  EXPECT_EQ(stem("vaccines"), "vaccine");
  EXPECT_EQ(stem("virus"), "virus");
  EXPECT_EQ(stem("analysis"), "analysis");
  EXPECT_EQ(stem("glass"), "glass");
  EXPECT_EQ(stem("sing"), "sing");  // stem would be too short
  EXPECT_EQ(stem("red"), "red");
}

TEST(Tokenize, StoplistUrlsMentionsDigits) {
  PreprocessOptions o;
  o.stoplist = {"the", "is"};
  o.stem = false;
  EXPECT_EQ(tokenize("The vaccine is safe", o), (std::vector<std::string>{"vaccine", "safe"}));
  EXPECT_EQ(tokenize("@cdc says https://x.co/abc 2021 covid-19 shots!!", o),
            (std::vector<std::string>{"says", "covid", "shots"}));
}

TEST(Tokenize, DefaultStoplistShipped) {
  const auto& s = default_stoplist();
  EXPECT_TRUE(s.contains("the"));
  EXPECT_TRUE(s.contains("and"));
  EXPECT_TRUE(s.contains("is"));
  EXPECT_FALSE(s.contains("vaccine"));
  EXPECT_EQ(default_stoplist_id(), "en-v1");
}

TEST(Preprocess, MinDocFreqAndProvenance) {
  const auto c = preprocess({"vaccine safety worries", "vaccine rollout", "unique"}, {});
  EXPECT_EQ(c.vocab, std::vector<std::string>{"vaccine"});
  EXPECT_EQ(c.stoplist_id, "en-v1");
  EXPECT_EQ(c.stemmer_id, "suffix-v1");
  for (const auto& d : c.docs) {
    for (auto w : d) EXPECT_LT(w, c.vocab.size());
  }
  EXPECT_THROW(preprocess({"the and", "is"}, {}), Error);
  EXPECT_THROW(preprocess({}, {}), Error);
}

TEST(Gibbs, SingleWordSingleTopic) {
  PreprocessOptions o;
  o.min_doc_freq = 1;
  const auto c = preprocess({"vaccine"}, o);
  const auto m = fit_gibbs(c, {1, std::nullopt, 0.01, 10, 1});
  EXPECT_EQ(m.topic_word_counts[0][0], 1);
  EXPECT_EQ(top_words(m, 0, 1), std::vector<std::string>{"vaccine"});
  EXPECT_DOUBLE_EQ(m.alpha, 50.0);
}

TEST(Gibbs, CountsConservedAfterEverySweep) {
  const auto c = oracle::two_set_corpus();
  std::size_t sweeps = 0;
  const auto m = fit_gibbs(c.corpus, {3, std::nullopt, 0.01, 50, 9}, [&](std::size_t, const LdaModel& model) {
    ++sweeps;
    EXPECT_TRUE(oracle::counts_conserved(model, c.corpus));
    EXPECT_FALSE(check_invariants(model, c.corpus).has_value());
  });
  EXPECT_EQ(sweeps, 50u);
  EXPECT_TRUE(oracle::counts_conserved(m, c.corpus));
}

TEST(Gibbs, CheckInvariantsDetectsCorruption) {
  const auto c = oracle::two_set_corpus();
  auto m = fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 5, 1});
  m.topic_word_counts[0][0] += 1;
  EXPECT_TRUE(check_invariants(m, c.corpus).has_value());
}

TEST(Gibbs, SeparatesDisjointVocabularies) {
  const auto c = oracle::two_set_corpus();
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 200, seed});
    if (oracle::separates(m, c)) ++separated;
  }
  EXPECT_GE(separated, 9);
}

TEST(Gibbs, DeterministicForSeed) {
  const auto c = oracle::two_set_corpus();
  const auto a = fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 30, 4});
  const auto b = fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 30, 4});
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  const auto other = fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 30, 5});
  EXPECT_NE(other.assignments, a.assignments);
}

TEST(Gibbs, DistributionsSumToOne) {
  const auto c = oracle::two_set_corpus();
  const auto m = fit_gibbs(c.corpus, {4, 0.1, 0.01, 20, 2});
  for (std::size_t k = 0; k < m.topics; ++k) {
    const auto p = topic_word_distribution(m, k);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(TopWords, TiesAreAlphabetical) {
  lda::TokenizedCorpus c;
  c.vocab = {"alpha", "beta", "gamma"};
  c.docs = {{2, 1, 0}};
  const auto m = fit_gibbs(c, {1, std::nullopt, 0.01, 3, 1});
  EXPECT_EQ(top_words(m, 0, 3), (std::vector<std::string>{"alpha", "beta", "gamma"}));
  const auto labels = topic_labels(m, 2, 3);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].label, "alpha beta");
  EXPECT_EQ(labels[0].index, 1u);
}

TEST(Gibbs, RejectsBadParams) {
  const auto c = oracle::two_set_corpus();
  EXPECT_THROW(fit_gibbs(c.corpus, {0, std::nullopt, 0.01, 10, 1}), Error);
  EXPECT_THROW(fit_gibbs(c.corpus, {2, std::nullopt, 0.01, 0, 1}), Error);
  EXPECT_THROW(fit_gibbs(c.corpus, {2, -1.0, 0.01, 10, 1}), Error);
}
