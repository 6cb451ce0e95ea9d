#include "agrag/util.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "agrag/error.hpp"

namespace agrag {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateChunkId: return "DuplicateChunkId";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::ResponseTooLong: return "ResponseTooLong";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::NoActionBlock: return "NoActionBlock";
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::WrongTopicCount: return "WrongTopicCount";
    case ErrorCode::EmptyLabel: return "EmptyLabel";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::AllTopicsEmpty: return "AllTopicsEmpty";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
  }
  return "Unknown";
}

namespace utf8 {

namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

bool valid_sequence(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = 1; i < len; ++i) {
    if ((static_cast<unsigned char>(text[pos + i]) >> 6) != 0x2) return false;
  }
  return true;
}

}  // namespace

std::vector<std::size_t> code_point_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  std::size_t pos = 0;
  while (pos < text.size()) {
    offsets.push_back(pos);
    std::size_t len = sequence_length(static_cast<unsigned char>(text[pos]));
    if (!valid_sequence(text, pos, len)) len = 1;
    pos += len;
  }
  offsets.push_back(text.size());
  return offsets;
}

std::size_t length(std::string_view text) { return code_point_offsets(text).size() - 1; }

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
  const auto offsets = code_point_offsets(text);
  const std::size_t n = offsets.size() - 1;
  if (start > end || end > n) {
    throw Error(ErrorCode::InvalidArgument, "utf8 substr range out of bounds");
  }
  return std::string(text.substr(offsets[start], offsets[end] - offsets[start]));
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto lead = static_cast<unsigned char>(text[pos]);
    std::size_t len = sequence_length(lead);
    if (!valid_sequence(text, pos, len)) len = 1;
    char32_t cp = 0;
    if (len == 1) {
      cp = lead;
    } else {
      cp = lead & (0xFF >> (len + 1));
      for (std::size_t i = 1; i < len; ++i) {
        cp = (cp << 6) | (static_cast<unsigned char>(text[pos + i]) & 0x3F);
      }
    }
    out.push_back(cp);
    pos += len;
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

}  // namespace utf8

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) noexcept {
  for (char c : bytes) {
    state ^= static_cast<unsigned char>(c);
    state *= kFnvPrime;
  }
  return state;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

}  // namespace agrag
