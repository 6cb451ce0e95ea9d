#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "agrag/http.hpp"
#include "agrag/util.hpp"

namespace agrag::embedding {

// Fixed-dimension real vector. All components are finite by construction.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> components);

  std::size_t dim() const noexcept { return components_.size(); }
  std::span<const double> components() const noexcept { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

  double norm() const noexcept;
  EmbeddingVector normalized() const;  // throws ZeroVector
  EmbeddingVector scaled(double factor) const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> components_;
};

double dot(std::span<const double> a, std::span<const double> b);

// <a,b> / (|a||b|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Signed feature hashing of lowercased character trigrams, L2-normalized.
// Requires dim >= 8. Texts shorter than three code points hash as one gram.
EmbeddingVector deterministic_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

enum class Backend { RemoteHttp, DeterministicTest };

struct EmbedderConfig {
  Backend backend = Backend::DeterministicTest;
  std::string model_name = "hash-trigram-v1";
  std::size_t dim = 384;
  bool normalize = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;            // deterministic backend only
  std::string base_url;              // remote backend: full embeddings endpoint URL
  std::string api_key_env = "EMBEDDING_API_KEY";
  std::size_t parallelism = 1;       // concurrent sub-batches
  http::RetryPolicy retry;
  std::chrono::milliseconds timeout{30000};

  // "model_name/dim", used to refuse cross-model comparisons.
  std::string identity() const;
};

json to_json(const EmbedderConfig& config);
EmbedderConfig embedder_config_from_json(const json& value, EmbedderConfig defaults = {});

class Embedder {
 public:
  explicit Embedder(EmbedderConfig config);
  virtual ~Embedder() = default;

  Embedder(const Embedder&) = delete;
  Embedder& operator=(const Embedder&) = delete;

  // Order-aligned with texts. Splits into sub-batches of config().batch_size,
  // running up to config().parallelism of them at once. Throws InvalidArgument
  // for empty texts, DimensionMismatch for wrong-width backend output.
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
  EmbeddingVector embed(const std::string& text) const;

  const EmbedderConfig& config() const noexcept { return config_; }

 protected:
  virtual std::vector<std::vector<double>> embed_raw(std::span<const std::string> batch) const = 0;

 private:
  EmbeddingVector finish(std::vector<double> raw) const;

  EmbedderConfig config_;
};

class DeterministicEmbedder final : public Embedder {
 public:
  explicit DeterministicEmbedder(EmbedderConfig config);

 protected:
  std::vector<std::vector<double>> embed_raw(std::span<const std::string> batch) const override;
};

// POST {model, input:[...]} -> {data:[{index, embedding:[...]}]}. The bearer
// credential is read from the environment variable named by api_key_env at
// request time and never stored.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig config);

 protected:
  std::vector<std::vector<double>> embed_raw(std::span<const std::string> batch) const override;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace agrag::embedding
