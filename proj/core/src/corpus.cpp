#include "agrag/corpus.hpp"

#include <unordered_map>
#include <unordered_set>

#include "agrag/error.hpp"

namespace agrag::corpus {

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::string error;  // empty when well-formed
};

// Parses one record starting at pos and advances pos past its terminator.
// On a quoting error the remainder of the physical line is discarded.
CsvRecord parse_record(std::string_view content, std::size_t& pos) {
  CsvRecord record;
  std::string field;
  bool in_quotes = false;
  bool after_quoted = false;
  const std::size_t n = content.size();

  const auto skip_line = [&] {
    while (pos < n && content[pos] != '\n') ++pos;
    if (pos < n) ++pos;
  };

  while (pos < n) {
    const char c = content[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < n && content[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          after_quoted = true;
          ++pos;
        }
      } else {
        field.push_back(c);
        ++pos;
      }
      continue;
    }
    if (c == ',') {
      record.fields.push_back(std::move(field));
      field.clear();
      after_quoted = false;
      ++pos;
    } else if (c == '\r' && pos + 1 < n && content[pos + 1] == '\n') {
      pos += 2;
      record.fields.push_back(std::move(field));
      return record;
    } else if (c == '\n') {
      ++pos;
      record.fields.push_back(std::move(field));
      return record;
    } else if (after_quoted) {
      record.error = "unexpected character after closing quote";
      skip_line();
      return record;
    } else if (c == '"') {
      if (!field.empty()) {
        record.error = "bare quote inside unquoted field";
        skip_line();
        return record;
      }
      in_quotes = true;
      ++pos;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (in_quotes) {
    record.error = "unterminated quoted field";
    return record;
  }
  record.fields.push_back(std::move(field));
  return record;
}

bool is_blank_line(std::string_view content, std::size_t pos) {
  return pos < content.size() &&
         (content[pos] == '\n' || (content[pos] == '\r' && pos + 1 < content.size() && content[pos + 1] == '\n'));
}

bool is_sentence_boundary(const std::u32string& text, std::size_t b) {
  if (b == 0 || b > text.size()) return false;
  const char32_t prev = text[b - 1];
  if (prev == U'\n') return true;
  if (prev != U'.' && prev != U'!' && prev != U'?') return false;
  return b == text.size() || text[b] == U' ' || text[b] == U'\t' || text[b] == U'\n' || text[b] == U'\r';
}

}  // namespace

IngestResult ingest_csv_text(std::string_view content, const IngestOptions& options) {
  if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

  std::size_t pos = 0;
  while (is_blank_line(content, pos)) pos += content[pos] == '\r' ? 2 : 1;
  if (pos >= content.size()) throw Error(ErrorCode::EmptyCorpus, "CSV has no header row");

  CsvRecord header = parse_record(content, pos);
  if (!header.error.empty()) throw Error(ErrorCode::MalformedRow, "header: " + header.error);

  std::optional<std::size_t> text_index;
  std::optional<std::size_t> id_index;
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    const std::string name = trim(header.fields[i]);
    if (name == options.text_column && !text_index) text_index = i;
    if (options.id_column && name == *options.id_column && !id_index) id_index = i;
  }
  if (!text_index) throw Error(ErrorCode::MissingColumn, "column '" + options.text_column + "' not in header");

  IngestResult result;
  std::unordered_set<std::string> seen_texts;
  std::unordered_set<std::string> seen_ids;
  std::size_t row = 0;

  while (pos < content.size()) {
    if (is_blank_line(content, pos)) {
      pos += content[pos] == '\r' ? 2 : 1;
      continue;
    }
    const std::size_t this_row = row++;
    CsvRecord record = parse_record(content, pos);
    if (record.error.empty() && record.fields.size() != header.fields.size()) {
      record.error = "expected " + std::to_string(header.fields.size()) + " fields, found " +
                     std::to_string(record.fields.size());
    }
    if (!record.error.empty()) {
      if (!options.skip_malformed) {
        throw Error(ErrorCode::MalformedRow, "data row " + std::to_string(this_row) + ": " + record.error);
      }
      ++result.malformed_rows_skipped;
      continue;
    }

    std::string text = trim(record.fields[*text_index]);
    if (text.empty()) {
      ++result.empty_rows_skipped;
      continue;
    }
    if (options.dedup && !seen_texts.insert(text).second) {
      ++result.duplicates_collapsed;
      continue;
    }

    Document doc;
    doc.source_row = this_row;
    doc.doc_id = id_index ? trim(record.fields[*id_index]) : "doc-" + std::to_string(this_row);
    if (doc.doc_id.empty() || !seen_ids.insert(doc.doc_id).second) {
      throw Error(ErrorCode::MalformedRow,
                  "data row " + std::to_string(this_row) + ": empty or duplicate id '" + doc.doc_id + "'");
    }
    doc.text = std::move(text);
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (i != *text_index) doc.meta.emplace(trim(header.fields[i]), record.fields[i]);
    }
    result.documents.push_back(std::move(doc));
  }

  if (result.documents.empty()) throw Error(ErrorCode::EmptyCorpus, "no usable rows");
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "no such file: " + path.string());
  return ingest_csv_text(read_text_file(path), options);
}

std::vector<Chunk> chunk(const Document& doc, const ChunkPolicy& policy) {
  if (policy.max_chars == 0 || policy.overlap_chars >= policy.max_chars) {
    throw Error(ErrorCode::InvalidArgument, "chunk policy requires max_chars > overlap_chars >= 0");
  }
  const std::u32string text = utf8::decode(doc.text);
  const std::size_t n = text.size();

  std::vector<Chunk> chunks;
  std::size_t start = 0;
  while (true) {
    std::size_t end = std::min(start + policy.max_chars, n);
    if (end < n && policy.prefer_sentence_boundaries) {
      for (std::size_t b = end; b > start + policy.overlap_chars; --b) {
        if (is_sentence_boundary(text, b)) {
          end = b;
          break;
        }
      }
    }
    Chunk c;
    c.ordinal = chunks.size();
    c.doc_id = doc.doc_id;
    c.chunk_id = doc.doc_id + "#" + std::to_string(c.ordinal);
    c.span = {start, end};
    c.text = utf8::encode(std::u32string_view(text).substr(start, end - start));
    chunks.push_back(std::move(c));
    if (end >= n) break;
    start = end - policy.overlap_chars;
  }
  return chunks;
}

std::vector<Chunk> chunk_all(std::span<const Document> docs, const ChunkPolicy& policy) {
  std::vector<Chunk> out;
  for (const auto& doc : docs) {
    auto pieces = chunk(doc, policy);
    out.insert(out.end(), std::make_move_iterator(pieces.begin()), std::make_move_iterator(pieces.end()));
  }
  return out;
}

std::string reconstruct(std::span<const Chunk> chunks) {
  std::u32string out;
  std::size_t covered = 0;
  for (const auto& c : chunks) {
    const std::u32string piece = utf8::decode(c.text);
    const std::size_t skip = covered > c.span.start ? covered - c.span.start : 0;
    if (skip < piece.size()) out.append(piece, skip, std::u32string::npos);
    covered = std::max(covered, c.span.end);
  }
  return utf8::encode(out);
}

json manifest_json(std::span<const Document> docs, std::span<const Chunk> chunks) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& c : chunks) ++counts[c.doc_id];
  json list = json::array();
  for (const auto& d : docs) {
    list.push_back({{"doc_id", d.doc_id},
                    {"source_row", d.source_row},
                    {"char_length", utf8::length(d.text)},
                    {"chunk_count", counts[d.doc_id]}});
  }
  return json{{"document_count", docs.size()}, {"chunk_count", chunks.size()}, {"documents", std::move(list)}};
}

json chunks_json(std::span<const Chunk> chunks) {
  json list = json::array();
  for (const auto& c : chunks) {
    list.push_back({{"chunk_id", c.chunk_id},
                    {"doc_id", c.doc_id},
                    {"ordinal", c.ordinal},
                    {"span", {c.span.start, c.span.end}},
                    {"text", c.text}});
  }
  return list;
}

std::vector<Chunk> chunks_from_json(const json& value) {
  std::vector<Chunk> out;
  for (const auto& item : value) {
    Chunk c;
    c.chunk_id = item.at("chunk_id").get<std::string>();
    c.doc_id = item.at("doc_id").get<std::string>();
    c.ordinal = item.at("ordinal").get<std::size_t>();
    c.span = {item.at("span").at(0).get<std::size_t>(), item.at("span").at(1).get<std::size_t>()};
    c.text = item.at("text").get<std::string>();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace agrag::corpus
