#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agrag/topics.hpp"
#include "agrag/util.hpp"

namespace agrag::lda {

inline constexpr std::string_view kStemmerId = "suffix-v1";

// Shipped English stoplist (core/data/stoplist_en_v1.txt) and its version tag.
const std::set<std::string>& default_stoplist();
std::string_view default_stoplist_id();

// Suffix stripping with a fixed ordered rule table; the first rule that
// leaves a stem of at least three letters wins:
//   sses->ss, ies->y, ings, ing, edly, ed, ers, er, ly, s (not after s/u/i)
// After removing ing/ed/er forms a doubled final consonant other than l/s/z
// is undoubled (running -> run).
std::string stem(std::string_view word);

struct PreprocessOptions {
  std::set<std::string> stoplist = default_stoplist();
  std::string stoplist_id = std::string(default_stoplist_id());
  bool stem = true;
  std::size_t min_token_len = 2;
  std::size_t min_doc_freq = 2;
};

struct TokenizedCorpus {
  std::vector<std::string> vocab;              // sorted
  std::vector<std::vector<std::size_t>> docs;  // vocab indices in text order
  std::string stoplist_id;
  std::string stemmer_id;

  std::size_t token_count() const;
};

// Lowercase, drop URLs/@mentions, split on non-alphanumerics, drop stopwords,
// short and all-digit tokens, then stem. No document-frequency filtering.
std::vector<std::string> tokenize(std::string_view text, const PreprocessOptions& options);

// tokenize() per text, then drop words found in fewer than min_doc_freq
// documents. Throws EmptyVocabulary when nothing survives.
TokenizedCorpus preprocess(const std::vector<std::string>& texts, const PreprocessOptions& options = {});

struct LdaParams {
  std::size_t topics = 10;
  std::optional<double> alpha;  // defaults to 50 / topics
  double beta = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 1;
};

struct LdaModel {
  std::size_t topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocab;
  std::vector<std::vector<std::int64_t>> topic_word_counts;  // topics x V
  std::vector<std::vector<std::int64_t>> doc_topic_counts;   // D x topics
  std::vector<std::int64_t> topic_totals;
  std::vector<std::vector<std::size_t>> assignments;         // per document, per token
  std::string stoplist_id;
  std::string stemmer_id;
};

using SweepObserver = std::function<void(std::size_t sweep, const LdaModel& model)>;

// Collapsed Gibbs sampling with
//   P(z = k | rest) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta),
// visiting tokens in document order from one mt19937_64 stream.
// `observer` runs after every sweep.
LdaModel fit_gibbs(const TokenizedCorpus& corpus, const LdaParams& params, const SweepObserver& observer = {});

// Empty when every count table agrees with the assignments; otherwise a
// description of the first inconsistency.
std::optional<std::string> check_invariants(const LdaModel& model, const TokenizedCorpus& corpus);

std::vector<double> topic_word_distribution(const LdaModel& model, std::size_t topic);

// Highest (n_kw + beta) first, ties alphabetical.
std::vector<std::string> top_words(const LdaModel& model, std::size_t topic, std::size_t n);

// Labels are the top-n words joined by spaces, one Topic per model topic.
std::vector<topics::Topic> topic_labels(const LdaModel& model, std::size_t n = 2, std::size_t word_limit = 3);

json to_json(const LdaModel& model);

}  // namespace agrag::lda
