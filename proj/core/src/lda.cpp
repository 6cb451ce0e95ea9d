#include "agrag/lda.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <sstream>

#include "agrag/error.hpp"

namespace agrag::lda {

namespace detail {
extern const char* const kStoplistEnV1;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.ends_with(suffix);
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
  bool undouble;
};

constexpr SuffixRule kRules[] = {
    {"sses", "ss", false}, {"ies", "y", false}, {"ings", "", true}, {"ing", "", true}, {"edly", "", true},
    {"ed", "", true},      {"ers", "", true},   {"er", "", true},   {"ly", "", false}, {"s", "", false},
};

constexpr std::size_t kMinStem = 3;

// Portable uniform in [0, 1): 53 high bits of one 64-bit draw.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

const std::set<std::string>& default_stoplist() {
  static const std::set<std::string> words = [] {
    std::set<std::string> out;
    std::istringstream in(detail::kStoplistEnV1);
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty() && line.front() != '#') out.insert(line);
    }
    return out;
  }();
  return words;
}

std::string_view default_stoplist_id() { return "en-v1"; }

std::string stem(std::string_view word) {
  for (const auto& rule : kRules) {
    if (!ends_with(word, rule.suffix)) continue;
    if (rule.suffix == "s" && (ends_with(word, "ss") || ends_with(word, "us") || ends_with(word, "is"))) {
      return std::string(word);
    }
    std::string base(word.substr(0, word.size() - rule.suffix.size()));
    base += rule.replacement;
    if (base.size() < kMinStem) continue;
    if (rule.undouble && base.size() > kMinStem) {
      const char last = base.back();
      if (last == base[base.size() - 2] && !is_vowel(last) && last != 'l' && last != 's' && last != 'z' &&
          std::isalpha(static_cast<unsigned char>(last))) {
        base.pop_back();
      }
    }
    return base;
  }
  return std::string(word);
}

std::size_t TokenizedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

std::vector<std::string> tokenize(std::string_view text, const PreprocessOptions& options) {
  std::vector<std::string> out;
  std::istringstream raw{ascii_lower(text)};
  std::string chunk;
  while (raw >> chunk) {
    if (chunk.rfind("http://", 0) == 0 || chunk.rfind("https://", 0) == 0 || chunk.rfind("www.", 0) == 0 ||
        chunk.front() == '@') {
      continue;
    }
    for (char& c : chunk) {
      const auto u = static_cast<unsigned char>(c);
      if (u < 0x80 && !std::isalnum(u)) c = ' ';
    }
    std::istringstream pieces(chunk);
    std::string token;
    while (pieces >> token) {
      if (utf8::length(token) < options.min_token_len) continue;
      if (std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        continue;
      }
      if (options.stoplist.contains(token)) continue;
      if (options.stem) token = stem(token);
      if (options.stoplist.contains(token) || utf8::length(token) < options.min_token_len) continue;
      out.push_back(std::move(token));
    }
  }
  return out;
}

TokenizedCorpus preprocess(const std::vector<std::string>& texts, const PreprocessOptions& options) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "no texts to preprocess");
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(texts.size());
  std::map<std::string, std::size_t> doc_freq;
  for (const auto& t : texts) {
    tokenized.push_back(tokenize(t, options));
    const std::set<std::string> unique(tokenized.back().begin(), tokenized.back().end());
    for (const auto& w : unique) ++doc_freq[w];
  }

  TokenizedCorpus corpus;
  corpus.stoplist_id = options.stoplist_id;
  corpus.stemmer_id = options.stem ? std::string(kStemmerId) : "none";
  std::map<std::string, std::size_t> index;
  for (const auto& [word, df] : doc_freq) {
    if (df >= options.min_doc_freq) {
      index.emplace(word, corpus.vocab.size());
      corpus.vocab.push_back(word);
    }
  }
  if (corpus.vocab.empty()) throw Error(ErrorCode::EmptyVocabulary, "preprocessing removed every word");
  for (const auto& tokens : tokenized) {
    std::vector<std::size_t> doc;
    for (const auto& w : tokens) {
      if (const auto it = index.find(w); it != index.end()) doc.push_back(it->second);
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

LdaModel fit_gibbs(const TokenizedCorpus& corpus, const LdaParams& params, const SweepObserver& observer) {
  if (params.topics == 0) throw Error(ErrorCode::InvalidArgument, "topic count must be >= 1");
  if (params.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (params.beta <= 0.0) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (corpus.vocab.empty() || corpus.token_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "corpus has no tokens");
  }
  const std::size_t K = params.topics;
  const std::size_t V = corpus.vocab.size();

  LdaModel m;
  m.topics = K;
  m.alpha = params.alpha.value_or(50.0 / static_cast<double>(K));
  if (m.alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  m.beta = params.beta;
  m.iterations = params.iterations;
  m.seed = params.seed;
  m.vocab = corpus.vocab;
  m.stoplist_id = corpus.stoplist_id;
  m.stemmer_id = corpus.stemmer_id;
  m.topic_word_counts.assign(K, std::vector<std::int64_t>(V, 0));
  m.doc_topic_counts.assign(corpus.docs.size(), std::vector<std::int64_t>(K, 0));
  m.topic_totals.assign(K, 0);
  m.assignments.resize(corpus.docs.size());

  std::mt19937_64 rng(params.seed);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    for (std::size_t w : corpus.docs[d]) {
      if (w >= V) throw Error(ErrorCode::InvalidArgument, "word index out of vocabulary");
      const auto k = std::min(K - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(K)));
      m.assignments[d].push_back(k);
      ++m.topic_word_counts[k][w];
      ++m.doc_topic_counts[d][k];
      ++m.topic_totals[k];
    }
  }

  const double v_beta = static_cast<double>(V) * m.beta;
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < params.iterations; ++sweep) {
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      auto& doc_counts = m.doc_topic_counts[d];
      for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
        const std::size_t w = corpus.docs[d][i];
        std::size_t k = m.assignments[d][i];
        --m.topic_word_counts[k][w];
        --doc_counts[k];
        --m.topic_totals[k];

        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (static_cast<double>(doc_counts[t]) + m.alpha) *
                   (static_cast<double>(m.topic_word_counts[t][w]) + m.beta) /
                   (static_cast<double>(m.topic_totals[t]) + v_beta);
          cumulative[t] = total;
        }
        const double target = uniform01(rng) * total;
        k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), target) -
                                     cumulative.begin());
        k = std::min(k, K - 1);

        m.assignments[d][i] = k;
        ++m.topic_word_counts[k][w];
        ++doc_counts[k];
        ++m.topic_totals[k];
      }
    }
    if (observer) observer(sweep, m);
  }
  return m;
}

std::optional<std::string> check_invariants(const LdaModel& m, const TokenizedCorpus& corpus) {
  const std::size_t K = m.topics;
  const std::size_t V = m.vocab.size();
  if (m.assignments.size() != corpus.docs.size()) return "assignment table has wrong document count";
  std::vector<std::vector<std::int64_t>> tw(K, std::vector<std::int64_t>(V, 0));
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    if (m.assignments[d].size() != corpus.docs[d].size()) return "document " + std::to_string(d) + " length mismatch";
    std::vector<std::int64_t> dk(K, 0);
    for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
      const std::size_t k = m.assignments[d][i];
      if (k >= K) return "topic id out of range";
      ++tw[k][corpus.docs[d][i]];
      ++dk[k];
    }
    std::int64_t row = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (dk[k] != m.doc_topic_counts[d][k]) return "doc_topic_counts disagree for document " + std::to_string(d);
      row += m.doc_topic_counts[d][k];
    }
    if (row != static_cast<std::int64_t>(corpus.docs[d].size())) return "document row sum mismatch";
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t sum = 0;
    for (std::size_t w = 0; w < V; ++w) {
      if (m.topic_word_counts[k][w] < 0) return "negative count";
      if (m.topic_word_counts[k][w] != tw[k][w]) return "topic_word_counts disagree for topic " + std::to_string(k);
      sum += m.topic_word_counts[k][w];
    }
    if (sum != m.topic_totals[k]) return "topic_totals disagree for topic " + std::to_string(k);
  }
  return std::nullopt;
}

std::vector<double> topic_word_distribution(const LdaModel& m, std::size_t topic) {
  if (topic >= m.topics) throw Error(ErrorCode::InvalidArgument, "topic id out of range");
  const double denom = static_cast<double>(m.topic_totals[topic]) + static_cast<double>(m.vocab.size()) * m.beta;
  std::vector<double> out(m.vocab.size());
  for (std::size_t w = 0; w < out.size(); ++w) {
    out[w] = (static_cast<double>(m.topic_word_counts[topic][w]) + m.beta) / denom;
  }
  return out;
}

std::vector<std::string> top_words(const LdaModel& m, std::size_t topic, std::size_t n) {
  if (topic >= m.topics) throw Error(ErrorCode::InvalidArgument, "topic id out of range");
  std::vector<std::size_t> order(m.vocab.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto& counts = m.topic_word_counts[topic];
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return m.vocab[a] < m.vocab[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, order.size()); ++i) out.push_back(m.vocab[order[i]]);
  return out;
}

std::vector<topics::Topic> topic_labels(const LdaModel& m, std::size_t n, std::size_t word_limit) {
  std::vector<topics::Topic> out;
  for (std::size_t k = 0; k < m.topics; ++k) {
    const auto words = top_words(m, k, n);
    topics::Topic t;
    t.index = k + 1;
    for (const auto& w : words) t.label += (t.label.empty() ? "" : " ") + w;
    t.word_count = words.size();
    t.violates_word_limit = t.word_count > word_limit;
    out.push_back(std::move(t));
  }
  return out;
}

json to_json(const LdaModel& m) {
  return json{{"topics", m.topics},
              {"alpha", m.alpha},
              {"beta", m.beta},
              {"iterations", m.iterations},
              {"seed", m.seed},
              {"stoplist_id", m.stoplist_id},
              {"stemmer_id", m.stemmer_id},
              {"vocab", m.vocab},
              {"topic_totals", m.topic_totals},
              {"topic_word_counts", m.topic_word_counts},
              {"doc_topic_counts", m.doc_topic_counts}};
}

}  // namespace agrag::lda
