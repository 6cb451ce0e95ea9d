#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrag/util.hpp"

namespace agrag::corpus {

struct Document {
  std::string doc_id;
  std::string text;
  std::size_t source_row = 0;  // 0-based data row (header excluded)
  std::map<std::string, std::string> meta;

  bool operator==(const Document&) const = default;
};

// Spans are code point offsets into the parent document text, [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::string text;
  Span span;
  std::size_t ordinal = 0;

  bool operator==(const Chunk&) const = default;
};

struct IngestOptions {
  std::string text_column = "text";
  // When set and present in the header, its values become doc ids (must be unique).
  std::optional<std::string> id_column;
  bool dedup = false;
  // Skip rows with quoting/field-count errors instead of failing on the first one.
  bool skip_malformed = false;
};

struct IngestResult {
  std::vector<Document> documents;
  std::size_t duplicates_collapsed = 0;
  std::size_t empty_rows_skipped = 0;
  std::size_t malformed_rows_skipped = 0;
};

// RFC-4180 CSV with a header row. Throws MissingColumn, EmptyCorpus or MalformedRow.
IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options = {});

// Same as ingest_csv over in-memory content.
IngestResult ingest_csv_text(std::string_view content, const IngestOptions& options = {});

struct ChunkPolicy {
  std::size_t max_chars = 512;
  std::size_t overlap_chars = 64;
  bool prefer_sentence_boundaries = true;
};

// Sliding window over code points. Window ends snap back to the last sentence
// boundary inside the window when one exists past the overlap region; the next
// window always starts overlap_chars before the previous end.
std::vector<Chunk> chunk(const Document& doc, const ChunkPolicy& policy = {});

std::vector<Chunk> chunk_all(std::span<const Document> docs, const ChunkPolicy& policy = {});

// Concatenates chunk texts after dropping each chunk's overlap with its predecessor.
std::string reconstruct(std::span<const Chunk> chunks);

json manifest_json(std::span<const Document> docs, std::span<const Chunk> chunks);

json chunks_json(std::span<const Chunk> chunks);
std::vector<Chunk> chunks_from_json(const json& value);

}  // namespace agrag::corpus
