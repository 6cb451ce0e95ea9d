#include "agrag/vectorstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "agrag/error.hpp"

namespace agrag::vectorstore {

namespace {

constexpr char kMagic[4] = {'A', 'G', 'V', 'S'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw Error(ErrorCode::CorruptIndex, "index file truncated");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t uint(int bytes) {
    const auto raw = take(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(raw[static_cast<std::size_t>(i)]);
    return v;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

VectorStore VectorStore::build(std::span<const Record> records, StoreInfo info) {
  VectorStore store;
  store.info_ = std::move(info);
  if (records.empty()) return store;

  store.dim_ = records.front().vector.dim();
  if (store.dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimension vector");
  std::unordered_set<std::string> seen;
  store.ids_.reserve(records.size());
  store.rows_.reserve(records.size() * store.dim_);
  for (const auto& r : records) {
    if (r.vector.dim() != store.dim_) {
      throw Error(ErrorCode::DimensionMismatch, "record '" + r.chunk_id + "' has dim " +
                                                    std::to_string(r.vector.dim()) + ", store dim " +
                                                    std::to_string(store.dim_));
    }
    if (!seen.insert(r.chunk_id).second) throw Error(ErrorCode::DuplicateChunkId, r.chunk_id);
    const auto unit = r.vector.normalized();
    for (double v : unit.components()) store.rows_.push_back(static_cast<float>(v));
    store.ids_.push_back(r.chunk_id);
  }
  return store;
}

std::span<const float> VectorStore::row(std::size_t index) const {
  if (index >= ids_.size()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
  return std::span<const float>(rows_).subspan(index * dim_, dim_);
}

EmbeddingVector VectorStore::vector(std::size_t index) const {
  const auto r = row(index);
  return EmbeddingVector(std::vector<double>(r.begin(), r.end()));
}

std::optional<std::size_t> VectorStore::find(const std::string& chunk_id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), chunk_id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

// Same arithmetic, term for term, as embedding::cosine_similarity(query, vector(i)).
std::vector<double> VectorStore::scores(const EmbeddingVector& query) const {
  if (query.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "query dim " + std::to_string(query.dim()) + ", store dim " + std::to_string(dim_));
  }
  double qq = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) qq += query[j] * query[j];
  if (qq == 0.0) throw Error(ErrorCode::ZeroVector, "zero query vector");

  std::vector<double> out(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const float* r = rows_.data() + i * dim_;
    double ab = 0.0;
    double bb = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double b = r[j];
      ab += query[j] * b;
      bb += b * b;
    }
    out[i] = std::clamp(ab / (std::sqrt(qq) * std::sqrt(bb)), -1.0, 1.0);
  }
  return out;
}

std::vector<SearchHit> VectorStore::search(const EmbeddingVector& query, std::size_t k) const {
  if (ids_.empty()) return {};
  const auto s = scores(query);
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  const auto better = [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); };
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

  std::vector<SearchHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) hits.push_back({ids_[order[i]], s[order[i]], order[i]});
  return hits;
}

std::vector<SearchHit> VectorStore::search_threshold(const EmbeddingVector& query, double floor,
                                                     std::size_t cap) const {
  if (floor < -1.0 || floor > 1.0 || std::isnan(floor)) {
    throw Error(ErrorCode::InvalidArgument, "floor must lie in [-1, 1]");
  }
  if (ids_.empty()) return {};
  const auto s = scores(query);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= floor) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  if (order.size() > cap) order.resize(cap);

  std::vector<SearchHit> hits;
  hits.reserve(order.size());
  for (std::size_t i : order) hits.push_back({ids_[i], s[i], i});
  return hits;
}

void VectorStore::persist(const std::filesystem::path& path) const {
  std::string body;
  for (const auto& id : ids_) {
    put_u32(body, static_cast<std::uint32_t>(id.size()));
    body += id;
  }
  for (float v : rows_) put_u32(body, std::bit_cast<std::uint32_t>(v));

  std::string out(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u64(out, ids_.size());
  out.push_back(info_.normalize ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(info_.model_name.size()));
  out += info_.model_name;
  put_u64(out, fnv1a64(body));
  out += body;
  write_text_file(path, out);
}

VectorStore VectorStore::load(const std::filesystem::path& path, const std::optional<std::string>& expected_model) {
  const std::string data = read_text_file(path);
  Reader in(data);
  if (in.take(4) != std::string_view(kMagic, 4)) throw Error(ErrorCode::CorruptIndex, "bad magic");
  const auto version = in.uint(4);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::CorruptIndex, "unsupported format version " + std::to_string(version));
  }
  VectorStore store;
  store.dim_ = static_cast<std::size_t>(in.uint(4));
  const auto count = static_cast<std::size_t>(in.uint(8));
  store.info_.normalize = in.uint(1) != 0;
  store.info_.model_name = std::string(in.take(static_cast<std::size_t>(in.uint(4))));
  const auto checksum = in.uint(8);

  if (fnv1a64(std::string_view(data).substr(in.position())) != checksum) {
    throw Error(ErrorCode::CorruptIndex, "checksum mismatch");
  }
  if ((count == 0) != (store.dim_ == 0)) throw Error(ErrorCode::CorruptIndex, "inconsistent shape");
  if (expected_model && *expected_model != store.info_.model_name) {
    throw Error(ErrorCode::ModelMismatch, "index built with '" + store.info_.model_name +
                                              "', run configured for '" + *expected_model + "'");
  }

  store.ids_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    store.ids_.emplace_back(in.take(static_cast<std::size_t>(in.uint(4))));
  }
  if (in.remaining() != count * store.dim_ * 4) throw Error(ErrorCode::CorruptIndex, "row block has wrong size");
  store.rows_.resize(count * store.dim_);
  for (auto& v : store.rows_) v = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));
  return store;
}

}  // namespace agrag::vectorstore
