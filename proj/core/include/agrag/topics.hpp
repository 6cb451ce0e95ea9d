#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agrag/agent.hpp"
#include "agrag/knowledge_base.hpp"
#include "agrag/llm.hpp"

namespace agrag::topics {

struct Topic {
  std::size_t index = 0;  // 1-based
  std::string label;      // without any "Topic N:" prefix
  std::size_t word_count = 0;
  bool violates_word_limit = false;

  bool operator==(const Topic&) const = default;
};

struct TopicParams {
  std::size_t k = 10;
  std::size_t word_limit = 3;
  std::string subject = "COVID-19 vaccine hesitancy";
  std::size_t rounds = 5;
};

struct RoundResult {
  std::size_t round_number = 0;
  std::vector<Topic> topics;
  std::string transcript_ref;
  std::string config_hash;
  json config_snapshot;
  std::size_t attempts = 1;

  std::vector<std::string> labels() const;
};

json to_json(const RoundResult& round);
RoundResult round_result_from_json(const json& value);

// Throws InvalidArgument when k or word_limit is zero.
std::string build_task_prompt(const std::string& subject, std::size_t k, std::size_t word_limit);

std::string strip_topic_prefix(std::string_view entry);

// Flags labels longer than word_limit without rejecting them. Throws
// WrongTopicCount, EmptyLabel or DuplicateLabel (case-insensitive).
std::vector<Topic> parse_topics(const std::vector<std::string>& answer, std::size_t k, std::size_t word_limit);

using ClientFactory = std::function<std::unique_ptr<llm::ChatClient>(std::size_t round_number)>;

struct RoundContext {
  KnowledgeBase kb;
  std::shared_ptr<const embedding::Embedder> embedder;
  ClientFactory client_factory;
  TopicParams topics;
  agent::Limits limits;
  agent::RetrieverOptions retriever;
  llm::CompletionParams completion;
  json config_snapshot = json::object();
  // When set, rounds/round_<n>.json and transcripts/<ref>[.envelope].json are written here.
  std::optional<std::filesystem::path> artifact_dir;
};

std::string config_hash(const json& config_snapshot);

struct RoundOutcome {
  std::size_t round_number = 0;
  std::optional<RoundResult> result;
  std::optional<ErrorCode> error_code;
  std::string error_message;
  std::vector<std::string> transcript_refs;  // one per attempt
  std::vector<agent::Transcript> transcripts;

  bool ok() const { return result.has_value(); }
};

// Task prompt -> agent run -> parse_topics. A WrongTopicCount answer triggers
// one complete re-run of the round before the round is reported as failed.
RoundOutcome run_round(const RoundContext& context, std::size_t round_number);

// Rounds 1..n with independent clients and transcripts; up to `parallelism`
// rounds at once. Failures are reported per round, never thrown.
std::vector<RoundOutcome> run_rounds(const RoundContext& context, std::size_t n, std::size_t parallelism = 1);

}  // namespace agrag::topics
