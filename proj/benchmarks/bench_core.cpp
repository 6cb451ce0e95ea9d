#include <benchmark/benchmark.h>

#include <random>

#include "agrag/embedding.hpp"
#include "agrag/lda.hpp"
#include "agrag/vectorstore.hpp"

using namespace agrag;

namespace {

std::vector<vectorstore::Record> random_records(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<vectorstore::Record> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    out.push_back({"c" + std::to_string(i), embedding::EmbeddingVector(std::move(v))});
  }
  return out;
}

void BM_SearchTopK(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto store = vectorstore::VectorStore::build(random_records(n, 384, rng), {"bench", true});
  const auto query = random_records(1, 384, rng).front().vector;
  for (auto _ : state) benchmark::DoNotOptimize(store.search(query, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SearchTopK)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_SearchThreshold(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto store = vectorstore::VectorStore::build(random_records(n, 384, rng), {"bench", true});
  const auto query = random_records(1, 384, rng).front().vector;
  for (auto _ : state) benchmark::DoNotOptimize(store.search_threshold(query, 0.05, 100));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SearchThreshold)->Arg(10000);

void BM_DeterministicEmbed(benchmark::State& state) {
  const std::string tweet =
      "Not taking the vaccine until the long term side effects are known, my body my choice #covid19";
  for (auto _ : state) benchmark::DoNotOptimize(embedding::deterministic_embed(tweet, 384, 0));
}
BENCHMARK(BM_DeterministicEmbed);

void BM_GibbsSweeps(benchmark::State& state) {
  const std::vector<std::string> vocab = {"vaccine", "safety", "mandate", "freedom", "trust",  "government",
                                          "fever",   "dose",   "booster", "pharma",  "profit", "immunity",
                                          "natural", "risk",   "death",   "injury",  "school", "travel"};
  std::mt19937_64 rng(3);
  std::vector<std::string> docs;
  for (int d = 0; d < 500; ++d) {
    std::string text;
    for (int w = 0; w < 20; ++w) text += vocab[rng() % vocab.size()] + " ";
    docs.push_back(text);
  }
  lda::PreprocessOptions pre;
  pre.min_doc_freq = 1;
  const auto corpus = lda::preprocess(docs, pre);
  lda::LdaParams p;
  p.topics = static_cast<std::size_t>(state.range(0));
  p.iterations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(lda::fit_gibbs(corpus, p));
  state.SetItemsProcessed(state.iterations() * 10 * 500 * 20);
}
BENCHMARK(BM_GibbsSweeps)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
