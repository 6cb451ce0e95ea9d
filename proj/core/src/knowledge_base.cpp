#include "agrag/knowledge_base.hpp"

#include "agrag/error.hpp"

namespace agrag {

const std::string& KnowledgeBase::text_of(const std::string& chunk_id) const {
  const auto it = texts->find(chunk_id);
  if (it == texts->end()) throw Error(ErrorCode::InvalidArgument, "unknown chunk '" + chunk_id + "'");
  return it->second;
}

KnowledgeBase build_knowledge_base(std::span<const corpus::Chunk> chunks, const embedding::Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = embedder.embed_batch(texts);

  std::vector<vectorstore::Record> records;
  records.reserve(chunks.size());
  auto text_map = std::make_shared<std::unordered_map<std::string, std::string>>();
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    records.push_back({chunks[i].chunk_id, std::move(vectors[i])});
    text_map->emplace(chunks[i].chunk_id, chunks[i].text);
  }
  auto store = std::make_shared<vectorstore::VectorStore>(vectorstore::VectorStore::build(
      records, {embedder.config().model_name, embedder.config().normalize}));
  return {std::move(store), std::move(text_map)};
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& dir, const std::optional<std::string>& expected_model) {
  auto store = std::make_shared<vectorstore::VectorStore>(
      vectorstore::VectorStore::load(dir / "index.agvs", expected_model));
  auto text_map = std::make_shared<std::unordered_map<std::string, std::string>>();
  for (const auto& c : corpus::chunks_from_json(read_json_file(dir / "chunks.json"))) {
    text_map->emplace(c.chunk_id, c.text);
  }
  for (std::size_t i = 0; i < store->size(); ++i) {
    if (!text_map->contains(store->chunk_id(i))) {
      throw Error(ErrorCode::CorruptIndex, "chunk '" + store->chunk_id(i) + "' missing from chunks.json");
    }
  }
  return {std::move(store), std::move(text_map)};
}

void save_knowledge_base(const std::filesystem::path& dir, std::span<const corpus::Chunk> chunks,
                         const KnowledgeBase& kb) {
  std::filesystem::create_directories(dir);
  kb.store->persist(dir / "index.agvs");
  write_json_file(dir / "chunks.json", corpus::chunks_json(chunks));
}

}  // namespace agrag
