#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "agrag/embedding.hpp"
#include "agrag/error.hpp"
#include "test_support.hpp"

using namespace agrag;
using namespace agrag::embedding;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return EmbeddingVector(v);
}

EmbedderConfig deterministic(std::size_t dim = 64, std::size_t batch = 64) {
  EmbedderConfig c;
  c.dim = dim;
  c.batch_size = batch;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no agrag::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({1, 0, 0}), vec({1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_NEAR(cosine_similarity(vec({1, 0}), vec({1, 1})), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cosine_similarity(vec({0, 0}), vec({1, 0})); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { cosine_similarity(vec({1, 0}), vec({1, 0, 0})); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { vec({1.0, std::nan("")}); }), ErrorCode::NonFinite);
  EXPECT_EQ(code_of([] { vec({0, 0}).normalized(); }), ErrorCode::ZeroVector);
}

TEST(Cosine, PropertiesOnRandomVectors) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t dim = 1 + rng() % 64;
    const auto a = random_vector(rng, dim);
    const auto b = random_vector(rng, dim);
    EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-9);
    EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
    EXPECT_NEAR(cosine_similarity(a.scaled(scale(rng)), b), cosine_similarity(a, b), 1e-9);
    const double c = cosine_similarity(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(Cosine, OrthogonalBasisVectors) {
  for (std::size_t dim = 2; dim <= 32; ++dim) {
    for (std::size_t i = 0; i + 1 < dim; ++i) {
      std::vector<double> a(dim, 0.0), b(dim, 0.0);
      a[i] = 2.5;
      b[i + 1] = 0.1;
      EXPECT_NEAR(cosine_similarity(vec(a), vec(b)), 0.0, 1e-9);
    }
  }
}

TEST(DeterministicEmbed, StableAndUnitNorm) {
  const auto a = deterministic_embed("Vaccine safety", 384, 0);
  EXPECT_EQ(a, deterministic_embed("vaccine SAFETY", 384, 0));
  EXPECT_EQ(a.dim(), 384u);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_NE(a, deterministic_embed("Vaccine safety", 384, 1));
  EXPECT_NEAR(deterministic_embed("ab", 8, 0).norm(), 1.0, 1e-12);
}

TEST(DeterministicEmbed, SharedTrigramsScoreHigher) {
  const auto base = deterministic_embed("vaccine safety", 384, 0);
  const double related = cosine_similarity(base, deterministic_embed("vaccine safety risks", 384, 0));
  const double unrelated = cosine_similarity(base, deterministic_embed("quarterly earnings call", 384, 0));
  EXPECT_GT(related, unrelated);
  EXPECT_GT(related, 0.5);
}

TEST(DeterministicEmbed, RejectsBadInput) {
  EXPECT_EQ(code_of([] { deterministic_embed("", 64, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { deterministic_embed("abc", 7, 0); }), ErrorCode::InvalidArgument);
}

TEST(Embedder, BatchContract) {
  DeterministicEmbedder e(deterministic());
  EXPECT_TRUE(e.embed_batch({}).empty());
  const std::vector<std::string> same = {"abc", "abc"};
  const auto out = e.embed_batch(same);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], out[1]);
  const std::vector<std::string> bad = {"ok", ""};
  EXPECT_EQ(code_of([&] { e.embed_batch(bad); }), ErrorCode::InvalidArgument);
}

TEST(Embedder, BatchSizeAndParallelismIndependence) {
  std::vector<std::string> texts;
  for (int i = 0; i < 37; ++i) texts.push_back("tweet number " + std::to_string(i * 7919));
  DeterministicEmbedder whole(deterministic(32, 1000));
  const auto all = whole.embed_batch(texts);
  for (std::size_t batch : {1u, 4u, 10u}) {
    auto config = deterministic(32, batch);
    config.parallelism = 3;
    DeterministicEmbedder split(config);
    EXPECT_EQ(split.embed_batch(texts), all);
  }
  const std::vector<std::string> xs(texts.begin(), texts.begin() + 20), ys(texts.begin() + 20, texts.end());
  auto joined = whole.embed_batch(xs);
  const auto tail = whole.embed_batch(ys);
  joined.insert(joined.end(), tail.begin(), tail.end());
  EXPECT_EQ(joined, all);
}

TEST(Embedder, ConfigJsonRoundTrip) {
  EmbedderConfig c;
  c.backend = Backend::RemoteHttp;
  c.model_name = "m";
  c.dim = 12;
  c.base_url = "http://x/v1/embeddings";
  c.retry.attempts = 5;
  const auto back = embedder_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.identity(), "m/12");
  EXPECT_FALSE(to_json(c).dump().find("EMBEDDING_API_KEY") == std::string::npos);
}

TEST(RemoteEmbedder, SendsModelAndParsesIndexedData) {
  ::setenv("AGRAG_TEST_EMBED_KEY", "secret-token", 1);
  agrag::testing::CaptureServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    json data = json::array();
    const auto& input = body.at("input");
    // Reverse order to check the client reorders by index.
    for (std::size_t i = input.size(); i-- > 0;) {
      data.push_back({{"index", i}, {"embedding", {double(i + 1), 1.0, 0.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  EmbedderConfig c;
  c.backend = Backend::RemoteHttp;
  c.model_name = "all-MiniLM-L6-v2";
  c.dim = 3;
  c.batch_size = 2;
  c.base_url = server.url("/v1/embeddings");
  c.api_key_env = "AGRAG_TEST_EMBED_KEY";
  const auto e = make_embedder(c);
  const std::vector<std::string> texts = {"a", "b", "c"};
  const auto out = e->embed_batch(texts);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_NEAR(cosine_similarity(out[0], vec({1, 1, 0})), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(out[1], vec({2, 1, 0})), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(out[2], vec({1, 1, 0})), 1.0, 1e-12);
  const auto bodies = server.bodies();
  ASSERT_EQ(bodies.size(), 2u);
  EXPECT_EQ(json::parse(bodies[0]).at("model"), "all-MiniLM-L6-v2");
  EXPECT_EQ(json::parse(bodies[0]).at("input"), json({"a", "b"}));
  EXPECT_EQ(server.auth_headers()[0], "Bearer secret-token");
}

TEST(RemoteEmbedder, WrongWidthIsDimensionMismatch) {
  agrag::testing::CaptureServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data":[{"index":0,"embedding":[1,2]}]})", "application/json");
  });
  EmbedderConfig c;
  c.backend = Backend::RemoteHttp;
  c.dim = 3;
  c.base_url = server.url("/e");
  const auto e = make_embedder(c);
  EXPECT_EQ(code_of([&] { e->embed("x"); }), ErrorCode::DimensionMismatch);
}

TEST(RemoteEmbedder, ServerErrorsExhaustRetries) {
  agrag::testing::CaptureServer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  EmbedderConfig c;
  c.backend = Backend::RemoteHttp;
  c.dim = 3;
  c.base_url = server.url("/e");
  c.retry.base_delay = std::chrono::milliseconds(1);
  const auto e = make_embedder(c);
  EXPECT_EQ(code_of([&] { e->embed("x"); }), ErrorCode::BackendUnavailable);
  EXPECT_EQ(server.bodies().size(), 3u);
}
