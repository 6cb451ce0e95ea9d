#include "agrag/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "agrag/error.hpp"

namespace agrag::eval {

namespace {

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

// Sums in sorted order so the result does not depend on the input order.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

double standard_error(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

TopicList topic_list_from_json(const json& v) {
  if (v.contains("topics") && v.at("topics").is_array()) {
    const auto round = topics::round_result_from_json(v);
    return {"round_" + std::to_string(round.round_number), round.labels()};
  }
  TopicList list;
  list.method_name = v.at("method_name").get<std::string>();
  list.labels = v.at("labels").get<std::vector<std::string>>();
  return list;
}

}  // namespace

std::vector<TopicList> load_topic_lists(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  std::vector<TopicList> out;
  try {
    if (doc.is_array()) {
      for (const auto& item : doc) out.push_back(topic_list_from_json(item));
    } else {
      out.push_back(topic_list_from_json(doc));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "bad topic list file " + path.string() + ": " + e.what());
  }
  return out;
}

std::vector<TopicList> load_topic_lists_dir(const std::filesystem::path& dir) {
  std::filesystem::path base = dir;
  if (std::filesystem::is_directory(dir / "rounds")) base = dir / "rounds";
  if (!std::filesystem::is_directory(base)) throw Error(ErrorCode::Io, "not a directory: " + base.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(base)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TopicList> out;
  for (const auto& f : files) {
    auto lists = load_topic_lists(f);
    out.insert(out.end(), lists.begin(), lists.end());
  }
  return out;
}

json to_json(const TopicList& list) { return json{{"method_name", list.method_name}, {"labels", list.labels}}; }

std::vector<EmbeddingVector> embed_topics(const std::vector<std::string>& labels, const embedding::Embedder& embedder) {
  std::vector<std::string> bare;
  bare.reserve(labels.size());
  for (const auto& l : labels) {
    bare.push_back(topics::strip_topic_prefix(l));
    if (bare.back().empty()) throw Error(ErrorCode::EmptyLabel, "empty topic label '" + l + "'");
  }
  auto vectors = embedder.embed_batch(bare);
  for (auto& v : vectors) v = v.normalized();
  return vectors;
}

KnowledgeBase align_knowledge_base(const KnowledgeBase& kb, const embedding::Embedder& eval_embedder,
                                   bool* reembedded) {
  const auto& store = *kb.store;
  const bool same_space = store.info().model_name == eval_embedder.config().model_name &&
                          (store.empty() || store.dim() == eval_embedder.config().dim);
  if (reembedded) *reembedded = !same_space;
  if (same_space) return kb;

  std::vector<corpus::Chunk> chunks;
  chunks.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    corpus::Chunk c;
    c.chunk_id = store.chunk_id(i);
    c.text = kb.text_of(c.chunk_id);
    chunks.push_back(std::move(c));
  }
  return build_knowledge_base(chunks, eval_embedder);
}

std::pair<double, double> weighted_relevance(const std::vector<TopicRelevance>& per_topic) {
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& t : per_topic) {
    if (t.retrieved_count == 0) continue;
    total += static_cast<double>(t.retrieved_count);
    weighted += static_cast<double>(t.retrieved_count) * t.mean_similarity;
  }
  if (total == 0.0) throw Error(ErrorCode::AllTopicsEmpty, "no topic retrieved any document");
  const double mean = weighted / total;

  double variance = 0.0;
  double sum_w2 = 0.0;
  for (const auto& t : per_topic) {
    if (t.retrieved_count == 0) continue;
    const double w = static_cast<double>(t.retrieved_count) / total;
    variance += w * (t.mean_similarity - mean) * (t.mean_similarity - mean);
    sum_w2 += w * w;
  }
  const double n_eff = 1.0 / sum_w2;
  double se = 0.0;
  if (n_eff > 1.0 + 1e-12) se = std::sqrt(variance * n_eff / (n_eff - 1.0) / n_eff);
  return {mean, se};
}

ValidityReport validity(const TopicList& topic_list, const KnowledgeBase& kb,
                        const embedding::Embedder& eval_embedder, const RetrievalParams& params) {
  if (topic_list.labels.empty()) throw Error(ErrorCode::InvalidArgument, "topic list is empty");
  if (params.cap == 0) throw Error(ErrorCode::InvalidArgument, "cap must be positive");

  ValidityReport report;
  report.method_name = topic_list.method_name;
  report.eval_embedder = eval_embedder.config().identity();
  report.retrieval = params;
  const KnowledgeBase aligned = align_knowledge_base(kb, eval_embedder, &report.corpus_reembedded);
  const auto& store = *aligned.store;

  const auto vectors = embed_topics(topic_list.labels, eval_embedder);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    TopicRelevance rel;
    rel.label = topics::strip_topic_prefix(topic_list.labels[i]);
    const auto hits = store.search_threshold(vectors[i], params.floor, params.cap);
    rel.retrieved_count = hits.size();
    if (!hits.empty()) {
      double sum = 0.0;
      for (const auto& h : hits) sum += embedding::cosine_similarity(vectors[i], store.vector(h.insertion_index));
      rel.mean_similarity = sum / static_cast<double>(hits.size());
    } else {
      report.empty_topics.push_back(rel.label);
    }
    report.per_topic.push_back(std::move(rel));
  }
  std::tie(report.weighted_score, report.standard_error) = weighted_relevance(report.per_topic);
  return report;
}

std::vector<ValidityReport> compare_methods(const std::vector<TopicList>& fixtures, const KnowledgeBase& kb,
                                            const embedding::Embedder& eval_embedder,
                                            const RetrievalParams& params) {
  if (fixtures.empty()) throw Error(ErrorCode::InvalidArgument, "no topic lists to compare");
  bool reembedded = false;
  const KnowledgeBase aligned = align_knowledge_base(kb, eval_embedder, &reembedded);
  std::vector<ValidityReport> reports;
  for (const auto& f : fixtures) {
    auto r = validity(f, aligned, eval_embedder, params);
    r.corpus_reembedded = reembedded;
    reports.push_back(std::move(r));
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const auto& a, const auto& b) { return a.weighted_score > b.weighted_score; });
  return reports;
}

double directional_score(const std::vector<EmbeddingVector>& anchor, const std::vector<EmbeddingVector>& other,
                         std::vector<double>* maxima) {
  if (anchor.empty() || other.empty()) throw Error(ErrorCode::InvalidArgument, "rounds must be non-empty");
  std::vector<double> best_per_topic;
  for (const auto& a : anchor) {
    double best = -1.0;
    for (const auto& b : other) best = std::max(best, embedding::cosine_similarity(a, b));
    best_per_topic.push_back(best);
  }
  const double score = sorted_sum(best_per_topic) / static_cast<double>(anchor.size());
  if (maxima) *maxima = std::move(best_per_topic);
  return score;
}

ReliabilityReport reliability_from_vectors(const std::vector<std::string>& names,
                                           const std::vector<std::vector<EmbeddingVector>>& rounds,
                                           std::size_t anchor, bool full_matrix) {
  if (rounds.size() < 2) throw Error(ErrorCode::InvalidArgument, "reliability needs at least two rounds");
  if (names.size() != rounds.size()) throw Error(ErrorCode::InvalidArgument, "one name per round required");
  if (anchor >= rounds.size()) throw Error(ErrorCode::InvalidArgument, "anchor index out of range");

  ReliabilityReport report;
  report.rounds = names;
  report.anchor = anchor;
  for (std::size_t j = 0; j < rounds.size(); ++j) {
    if (j == anchor) continue;
    PairScore pair;
    pair.anchor = names[anchor];
    pair.other = names[j];
    pair.score = directional_score(rounds[anchor], rounds[j], &pair.maxima);
    pair.standard_error = standard_error(pair.maxima);
    report.scores_vs_anchor.push_back(std::move(pair));
  }
  if (full_matrix) {
    std::vector<std::vector<double>> m(rounds.size(), std::vector<double>(rounds.size()));
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      for (std::size_t j = 0; j < rounds.size(); ++j) m[i][j] = directional_score(rounds[i], rounds[j]);
    }
    report.full_matrix = std::move(m);
  }
  return report;
}

ReliabilityReport reliability(const std::vector<TopicList>& rounds, const embedding::Embedder& eval_embedder,
                              std::size_t anchor, bool full_matrix) {
  if (rounds.size() < 2) throw Error(ErrorCode::InvalidArgument, "reliability needs at least two rounds");
  std::vector<std::string> names;
  std::vector<std::vector<EmbeddingVector>> vectors;
  for (const auto& r : rounds) {
    if (r.labels.empty()) throw Error(ErrorCode::InvalidArgument, "round '" + r.method_name + "' is empty");
    names.push_back(r.method_name);
    vectors.push_back(embed_topics(r.labels, eval_embedder));
  }
  auto report = reliability_from_vectors(names, vectors, anchor, full_matrix);
  report.eval_embedder = eval_embedder.config().identity();
  return report;
}

json to_json(const ValidityReport& r) {
  json per_topic = json::array();
  for (const auto& t : r.per_topic) {
    per_topic.push_back(
        {{"label", t.label}, {"retrieved_count", t.retrieved_count}, {"mean_similarity", t.mean_similarity}});
  }
  return json{{"method_name", r.method_name},
              {"weighted_score", r.weighted_score},
              {"standard_error", r.standard_error},
              {"standard_error_definition", "interpretation: count-weighted SE of per-topic mean similarities, n_eff = 1 / sum(w^2)"},
              {"per_topic", std::move(per_topic)},
              {"empty_topics", r.empty_topics},
              {"eval_embedder", r.eval_embedder},
              {"retrieval_params", {{"floor", r.retrieval.floor}, {"cap", r.retrieval.cap}}},
              {"corpus_reembedded", r.corpus_reembedded},
              {"similarity_target", "retrieved chunk embeddings"}};
}

json to_json(const ReliabilityReport& r) {
  json pairs = json::array();
  for (const auto& p : r.scores_vs_anchor) {
    pairs.push_back({{"anchor", p.anchor},
                     {"other", p.other},
                     {"direction", p.anchor + " -> " + p.other},
                     {"score", p.score},
                     {"standard_error", p.standard_error},
                     {"maxima", p.maxima}});
  }
  json out{{"rounds", r.rounds},
           {"anchor", r.rounds.at(r.anchor)},
           {"scores_vs_anchor", std::move(pairs)},
           {"eval_embedder", r.eval_embedder}};
  if (r.full_matrix) out["full_matrix"] = *r.full_matrix;
  return out;
}

std::string validity_table(const std::vector<ValidityReport>& reports) {
  std::ostringstream out;
  out << "method                                    score     +/-SE   topics  empty\n";
  for (const auto& r : reports) {
    std::string name = r.method_name;
    name.resize(std::max<std::size_t>(name.size(), 40), ' ');
    out << name << "  " << fixed(r.weighted_score, 2) << "    " << fixed(r.standard_error, 3) << "    "
        << r.per_topic.size() << "      " << r.empty_topics.size() << "\n";
  }
  out << "SE (interpretation): count-weighted spread of per-topic mean similarities.\n";
  return out.str();
}

std::string validity_csv(const std::vector<ValidityReport>& reports) {
  std::string out = "method,score,stderr\n";
  for (const auto& r : reports) {
    out += "\"" + r.method_name + "\"," + fixed(r.weighted_score, 17) + "," + fixed(r.standard_error, 17) + "\n";
  }
  return out;
}

std::string reliability_table(const ReliabilityReport& r) {
  std::ostringstream out;
  out << "anchor -> other                 score   +/-SE\n";
  for (const auto& p : r.scores_vs_anchor) {
    std::string pair = p.anchor + " -> " + p.other;
    pair.resize(std::max<std::size_t>(pair.size(), 30), ' ');
    out << pair << "  " << fixed(p.score, 2) << "    " << fixed(p.standard_error, 3) << "\n";
  }
  return out.str();
}

std::string reliability_csv(const ReliabilityReport& r) {
  std::string out = "pair,score,stderr\n";
  for (const auto& p : r.scores_vs_anchor) {
    out += "\"" + p.anchor + "->" + p.other + "\"," + fixed(p.score, 17) + "," + fixed(p.standard_error, 17) + "\n";
  }
  return out;
}

}  // namespace agrag::eval
