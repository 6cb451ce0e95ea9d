#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>

#include "agrag/corpus.hpp"
#include "agrag/embedding.hpp"
#include "agrag/vectorstore.hpp"

namespace agrag {

// The searchable index together with the chunk texts it refers to.
struct KnowledgeBase {
  std::shared_ptr<const vectorstore::VectorStore> store;
  std::shared_ptr<const std::unordered_map<std::string, std::string>> texts;

  const std::string& text_of(const std::string& chunk_id) const;
};

KnowledgeBase build_knowledge_base(std::span<const corpus::Chunk> chunks, const embedding::Embedder& embedder);

// Reads <dir>/index.agvs and <dir>/chunks.json as written by save_knowledge_base.
KnowledgeBase load_knowledge_base(const std::filesystem::path& dir,
                                  const std::optional<std::string>& expected_model = std::nullopt);
void save_knowledge_base(const std::filesystem::path& dir, std::span<const corpus::Chunk> chunks,
                         const KnowledgeBase& kb);

}  // namespace agrag
