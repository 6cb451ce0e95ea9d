#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "agrag/agent.hpp"
#include "agrag/corpus.hpp"
#include "agrag/embedding.hpp"
#include "agrag/evaluation.hpp"
#include "agrag/llm.hpp"
#include "agrag/topics.hpp"

namespace agrag::cli {

struct CorpusConfig {
  std::string csv_path;
  std::string text_column = "text";
  std::optional<std::string> id_column;
  bool dedup = false;
  bool skip_malformed = false;
};

struct LlmConfig {
  std::string backend = "http";  // http | scripted
  std::string script_path;       // scripted backend
  llm::HttpChatConfig http;
  llm::CompletionParams params;
};

// Everything a run depends on. Credentials are referenced by environment
// variable name only, so the serialized form is safe to persist.
struct RunConfig {
  CorpusConfig corpus;
  corpus::ChunkPolicy chunking;
  embedding::EmbedderConfig index_embedder;
  embedding::EmbedderConfig eval_embedder;
  LlmConfig llm;
  agent::Limits agent;
  std::size_t retriever_k = 15;
  topics::TopicParams topics;
  eval::RetrievalParams eval;
  std::uint64_t seed = 0;
  std::string artifact_dir = "artifacts";
  std::size_t parallel_rounds = 1;
};

RunConfig default_config();
json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const json& value);
RunConfig load_config(const std::filesystem::path& path);

// Serialized config without artifact_dir: what the run's results depend on.
json config_snapshot(const RunConfig& config);

}  // namespace agrag::cli
