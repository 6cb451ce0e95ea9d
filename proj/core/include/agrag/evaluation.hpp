#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agrag/embedding.hpp"
#include "agrag/knowledge_base.hpp"
#include "agrag/topics.hpp"

namespace agrag::eval {

using embedding::EmbeddingVector;

// Reverse-retrieval rule: every document scoring >= floor against the topic,
// best first, at most cap of them.
struct RetrievalParams {
  double floor = 0.30;
  std::size_t cap = 100;
};

struct TopicList {
  std::string method_name;
  std::vector<std::string> labels;
};

// Accepts {method_name, labels}, an array of those, or a RoundResult
// document (named "round_<n>").
std::vector<TopicList> load_topic_lists(const std::filesystem::path& path);
// All *.json files in dir, in filename order. Uses dir/rounds when present.
std::vector<TopicList> load_topic_lists_dir(const std::filesystem::path& dir);
json to_json(const TopicList& list);

// One unit vector per label; "Topic N:" prefixes are stripped first.
std::vector<EmbeddingVector> embed_topics(const std::vector<std::string>& labels, const embedding::Embedder& embedder);

struct TopicRelevance {
  std::string label;
  std::size_t retrieved_count = 0;
  double mean_similarity = 0.0;  // 0 when nothing was retrieved
};

struct ValidityReport {
  std::string method_name;
  std::vector<TopicRelevance> per_topic;
  double weighted_score = 0.0;
  // Weighted standard error of per-topic mean similarities (count weights).
  double standard_error = 0.0;
  std::vector<std::string> empty_topics;
  std::string eval_embedder;
  RetrievalParams retrieval;
  bool corpus_reembedded = false;
};

// Returns kb unchanged when its index was built with the eval embedder's
// model and dimension; otherwise re-embeds every chunk with it.
KnowledgeBase align_knowledge_base(const KnowledgeBase& kb, const embedding::Embedder& eval_embedder,
                                   bool* reembedded = nullptr);

// Throws AllTopicsEmpty when no topic retrieves anything.
ValidityReport validity(const TopicList& topics, const KnowledgeBase& kb, const embedding::Embedder& eval_embedder,
                        const RetrievalParams& params = {});

// sum(count * mean) / sum(count) over topics with count > 0, and its weighted SE.
std::pair<double, double> weighted_relevance(const std::vector<TopicRelevance>& per_topic);

// Sorted by weighted_score, highest first.
std::vector<ValidityReport> compare_methods(const std::vector<TopicList>& fixtures, const KnowledgeBase& kb,
                                            const embedding::Embedder& eval_embedder,
                                            const RetrievalParams& params = {});

struct PairScore {
  std::string anchor;
  std::string other;
  double score = 0.0;
  double standard_error = 0.0;
  std::vector<double> maxima;  // per anchor topic
};

struct ReliabilityReport {
  std::vector<std::string> rounds;
  std::size_t anchor = 0;
  std::vector<PairScore> scores_vs_anchor;  // one per non-anchor round, in round order
  std::optional<std::vector<std::vector<double>>> full_matrix;  // [from][to]
  std::string eval_embedder;
};

// Mean over anchor topics of the best cosine against any topic of `other`.
double directional_score(const std::vector<EmbeddingVector>& anchor, const std::vector<EmbeddingVector>& other,
                         std::vector<double>* maxima = nullptr);

ReliabilityReport reliability_from_vectors(const std::vector<std::string>& names,
                                           const std::vector<std::vector<EmbeddingVector>>& rounds,
                                           std::size_t anchor = 0, bool full_matrix = false);

// Needs at least two non-empty rounds.
ReliabilityReport reliability(const std::vector<TopicList>& rounds, const embedding::Embedder& eval_embedder,
                              std::size_t anchor = 0, bool full_matrix = false);

json to_json(const ValidityReport& report);
json to_json(const ReliabilityReport& report);

std::string validity_table(const std::vector<ValidityReport>& reports);
std::string validity_csv(const std::vector<ValidityReport>& reports);  // method,score,stderr
std::string reliability_table(const ReliabilityReport& report);
std::string reliability_csv(const ReliabilityReport& report);  // pair,score,stderr

}  // namespace agrag::eval
