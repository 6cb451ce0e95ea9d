#include "agrag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>

#include "agrag/error.hpp"

namespace agrag::embedding {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string backend_name(Backend backend) {
  return backend == Backend::RemoteHttp ? "remote_http" : "deterministic_test";
}

Backend backend_from_name(const std::string& name) {
  if (name == "remote_http") return Backend::RemoteHttp;
  if (name == "deterministic_test") return Backend::DeterministicTest;
  throw Error(ErrorCode::Config, "unknown embedding backend '" + name + "'");
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> components) : components_(std::move(components)) {
  for (double v : components_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "embedding component is not finite");
  }
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : components_) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorCode::ZeroVector, "cannot normalize an all-zero vector");
  std::vector<double> out(components_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = components_[i] / n;
  return EmbeddingVector(std::move(out));
}

EmbeddingVector EmbeddingVector::scaled(double factor) const {
  std::vector<double> out(components_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = components_[i] * factor;
  return EmbeddingVector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of an all-zero vector");
  // sqrt(aa) * sqrt(bb) commutes exactly, so the result is symmetric bit for bit.
  const double c = ab / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

EmbeddingVector deterministic_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::InvalidArgument, "deterministic embedder requires dim >= 8");
  const std::u32string cps = utf8::decode(ascii_lower(text));
  if (cps.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");

  constexpr std::size_t kGram = 3;
  const std::uint64_t salt = splitmix64(seed);
  std::vector<double> acc(dim, 0.0);
  std::size_t first_bucket = 0;
  const std::size_t gram_count = cps.size() < kGram ? 1 : cps.size() - kGram + 1;
  for (std::size_t i = 0; i < gram_count; ++i) {
    const std::string gram = utf8::encode(std::u32string_view(cps).substr(i, std::min(kGram, cps.size())));
    const std::uint64_t h = splitmix64(fnv1a64(gram, kFnvOffset ^ salt));
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    const double sign = (splitmix64(h) & 1U) ? -1.0 : 1.0;
    acc[bucket] += sign;
    if (i == 0) first_bucket = bucket;
  }
  EmbeddingVector v(std::move(acc));
  if (v.norm() == 0.0) {
    // Signed collisions cancelled everything; fall back to the first gram's bucket.
    std::vector<double> unit(dim, 0.0);
    unit[first_bucket] = 1.0;
    return EmbeddingVector(std::move(unit));
  }
  return v.normalized();
}

std::string EmbedderConfig::identity() const { return model_name + "/" + std::to_string(dim); }

json to_json(const EmbedderConfig& c) {
  return json{{"backend", backend_name(c.backend)},
              {"model_name", c.model_name},
              {"dim", c.dim},
              {"normalize", c.normalize},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"base_url", c.base_url},
              {"api_key_env", c.api_key_env},
              {"parallelism", c.parallelism},
              {"retry", {{"attempts", c.retry.attempts}, {"base_delay_ms", c.retry.base_delay.count()}}},
              {"timeout_ms", c.timeout.count()}};
}

EmbedderConfig embedder_config_from_json(const json& v, EmbedderConfig c) {
  if (v.contains("backend")) c.backend = backend_from_name(v.at("backend").get<std::string>());
  if (v.contains("model_name")) c.model_name = v.at("model_name").get<std::string>();
  if (v.contains("dim")) c.dim = v.at("dim").get<std::size_t>();
  if (v.contains("normalize")) c.normalize = v.at("normalize").get<bool>();
  if (v.contains("batch_size")) c.batch_size = v.at("batch_size").get<std::size_t>();
  if (v.contains("seed")) c.seed = v.at("seed").get<std::uint64_t>();
  if (v.contains("base_url")) c.base_url = v.at("base_url").get<std::string>();
  if (v.contains("api_key_env")) c.api_key_env = v.at("api_key_env").get<std::string>();
  if (v.contains("parallelism")) c.parallelism = v.at("parallelism").get<std::size_t>();
  if (v.contains("retry")) {
    const auto& r = v.at("retry");
    if (r.contains("attempts")) c.retry.attempts = r.at("attempts").get<int>();
    if (r.contains("base_delay_ms")) c.retry.base_delay = std::chrono::milliseconds(r.at("base_delay_ms").get<long>());
  }
  if (v.contains("timeout_ms")) c.timeout = std::chrono::milliseconds(v.at("timeout_ms").get<long>());
  if (c.dim == 0) throw Error(ErrorCode::Config, "embedder dim must be positive");
  if (c.batch_size == 0) throw Error(ErrorCode::Config, "embedder batch_size must be positive");
  return c;
}

Embedder::Embedder(EmbedderConfig config) : config_(std::move(config)) {
  if (config_.dim == 0) throw Error(ErrorCode::Config, "embedder dim must be positive");
  if (config_.batch_size == 0) throw Error(ErrorCode::Config, "embedder batch_size must be positive");
  if (config_.parallelism == 0) config_.parallelism = 1;
}

EmbeddingVector Embedder::finish(std::vector<double> raw) const {
  if (raw.size() != config_.dim) {
    throw Error(ErrorCode::DimensionMismatch, "backend returned width " + std::to_string(raw.size()) +
                                                  ", expected " + std::to_string(config_.dim));
  }
  EmbeddingVector v(std::move(raw));
  return config_.normalize ? v.normalized() : v;
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trim(texts[i]).empty()) {
      throw Error(ErrorCode::InvalidArgument, "text " + std::to_string(i) + " is empty");
    }
  }
  std::vector<EmbeddingVector> out(texts.size());
  const std::size_t batch = config_.batch_size;
  const std::size_t batches = (texts.size() + batch - 1) / batch;

  const auto run_batch = [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t count = std::min(batch, texts.size() - begin);
    auto raw = embed_raw(texts.subspan(begin, count));
    if (raw.size() != count) {
      throw Error(ErrorCode::DimensionMismatch, "backend returned " + std::to_string(raw.size()) +
                                                    " vectors for " + std::to_string(count) + " inputs");
    }
    for (std::size_t i = 0; i < count; ++i) out[begin + i] = finish(std::move(raw[i]));
  };

  for (std::size_t wave = 0; wave < batches; wave += config_.parallelism) {
    const std::size_t wave_end = std::min(batches, wave + config_.parallelism);
    if (wave_end - wave == 1) {
      run_batch(wave);
      continue;
    }
    std::vector<std::future<void>> pending;
    for (std::size_t b = wave; b < wave_end; ++b) pending.push_back(std::async(std::launch::async, run_batch, b));
    for (auto& f : pending) f.get();
  }
  return out;
}

EmbeddingVector Embedder::embed(const std::string& text) const {
  return embed_batch(std::span<const std::string>(&text, 1)).front();
}

DeterministicEmbedder::DeterministicEmbedder(EmbedderConfig config) : Embedder(std::move(config)) {
  if (this->config().dim < 8) throw Error(ErrorCode::Config, "deterministic embedder requires dim >= 8");
}

std::vector<std::vector<double>> DeterministicEmbedder::embed_raw(std::span<const std::string> batch) const {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& text : batch) {
    const auto v = deterministic_embed(text, config().dim, config().seed);
    out.emplace_back(v.components().begin(), v.components().end());
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config) : Embedder(std::move(config)) {
  if (this->config().base_url.empty()) throw Error(ErrorCode::Config, "remote embedder requires base_url");
  http::split_url(this->config().base_url);
}

std::vector<std::vector<double>> RemoteEmbedder::embed_raw(std::span<const std::string> batch) const {
  http::Request request;
  request.url = config().base_url;
  request.timeout = config().timeout;
  request.body = json{{"model", config().model_name}, {"input", json(std::vector<std::string>(batch.begin(), batch.end()))}}.dump();
  if (const char* key = std::getenv(config().api_key_env.c_str()); key != nullptr && *key != '\0') {
    request.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  const auto response = http::with_retries(config().retry, "embedding request", [&] {
    auto r = http::post_json(request);
    http::check_status(r, "embedding request");
    return r;
  });

  json parsed;
  try {
    parsed = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("unparseable embedding response: ") + e.what());
  }
  if (!parsed.contains("data") || !parsed.at("data").is_array()) {
    throw Error(ErrorCode::BackendUnavailable, "embedding response lacks a data array");
  }
  std::vector<std::vector<double>> out(batch.size());
  std::vector<bool> filled(batch.size(), false);
  std::size_t position = 0;
  for (const auto& item : parsed.at("data")) {
    const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : position;
    ++position;
    if (index >= batch.size() || filled[index]) {
      throw Error(ErrorCode::BackendUnavailable, "embedding response has bad index " + std::to_string(index));
    }
    out[index] = item.at("embedding").get<std::vector<double>>();
    filled[index] = true;
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding response is missing vectors");
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  if (config.backend == Backend::RemoteHttp) return std::make_unique<RemoteEmbedder>(config);
  return std::make_unique<DeterministicEmbedder>(config);
}

}  // namespace agrag::embedding
