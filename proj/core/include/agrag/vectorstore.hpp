#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrag/embedding.hpp"

namespace agrag::vectorstore {

using embedding::EmbeddingVector;

struct SearchHit {
  std::string chunk_id;
  double score = 0.0;
  std::size_t insertion_index = 0;

  bool operator==(const SearchHit&) const = default;
};

struct Record {
  std::string chunk_id;
  EmbeddingVector vector;
};

// Provenance of the vectors; persisted so an index is never searched with a
// query from a different embedding space.
struct StoreInfo {
  std::string model_name;
  bool normalize = true;
};

// Immutable exact-search index. Rows are L2-normalized and held as float32,
// which is also the on-disk representation, so persist/load is lossless.
class VectorStore {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  // Throws DuplicateChunkId, DimensionMismatch or ZeroVector.
  static VectorStore build(std::span<const Record> records, StoreInfo info);

  // Exact top-k by cosine; ties by ascending insertion index.
  std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;

  // Every hit with score >= floor, sorted as search(), truncated to cap.
  std::vector<SearchHit> search_threshold(const EmbeddingVector& query, double floor, std::size_t cap) const;

  void persist(const std::filesystem::path& path) const;

  // Throws CorruptIndex on checksum/shape problems, ModelMismatch when
  // expected_model is given and differs from the recorded model name.
  static VectorStore load(const std::filesystem::path& path,
                          const std::optional<std::string>& expected_model = std::nullopt);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const StoreInfo& info() const noexcept { return info_; }

  const std::string& chunk_id(std::size_t index) const { return ids_.at(index); }
  std::span<const float> row(std::size_t index) const;
  EmbeddingVector vector(std::size_t index) const;
  std::optional<std::size_t> find(const std::string& chunk_id) const;

 private:
  VectorStore() = default;

  std::vector<double> scores(const EmbeddingVector& query) const;

  std::size_t dim_ = 0;
  StoreInfo info_;
  std::vector<std::string> ids_;
  std::vector<float> rows_;  // size() * dim_, row-major in insertion order
};

}  // namespace agrag::vectorstore
