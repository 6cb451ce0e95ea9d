#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace agrag {

using json = nlohmann::json;

namespace utf8 {

// Byte offset of every code point start, plus a trailing entry equal to
// text.size(). Invalid sequences are treated as single-byte code points.
std::vector<std::size_t> code_point_offsets(std::string_view text);

std::size_t length(std::string_view text);

// Substring by code point range [start, end).
std::string substr(std::string_view text, std::size_t start, std::size_t end);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

}  // namespace utf8

std::string ascii_lower(std::string_view text);
std::string trim(std::string_view text);

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) noexcept;
std::string to_hex(std::uint64_t value);

json read_json_file(const std::filesystem::path& path);
// Writes pretty-printed JSON with a trailing newline; parent directories are created.
void write_json_file(const std::filesystem::path& path, const json& value);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace agrag
