#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agrag/agent.hpp"
#include "agrag/corpus.hpp"
#include "agrag/error.hpp"
#include "agrag/evaluation.hpp"
#include "agrag/knowledge_base.hpp"
#include "agrag/lda.hpp"
#include "agrag/topics.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace agrag::cli {

namespace {

constexpr const char* kConfigHelp = R"(Config file (JSON) keys, all optional; flags override the file:
  corpus.{csv_path,text_column,id_column,dedup,skip_malformed}
  chunking.{max_chars,overlap_chars,prefer_sentence_boundaries}
  index_embedder / eval_embedder.{backend: deterministic_test|remote_http, model_name, dim,
      normalize, batch_size, seed, base_url, api_key_env, parallelism, retry.{attempts,base_delay_ms}, timeout_ms}
  llm.{backend: http|scripted, script_path, base_url, api_key_env, model_name, temperature,
      max_output_chars, seed, timeout_ms, retry.{attempts,base_delay_ms}}
  agent.{max_steps,max_parse_retries,retriever_k}
  topics.{k,word_limit,subject,rounds}
  eval.{floor,cap}
  seed, artifact_dir, parallel_rounds
Credentials are read from the environment variables named by *.api_key_env
(defaults EMBEDDING_API_KEY and OPENAI_API_KEY) and never written to artifacts.)";

// A failure attributed to a pipeline stage.
struct StageError : std::runtime_error {
  StageError(std::string stage_name, const std::string& message)
      : std::runtime_error(message), stage(std::move(stage_name)) {}
  std::string stage;
};

struct CorpusFlags {
  std::optional<std::string> csv;
  std::optional<std::string> text_column;
  bool dedup = false;
  bool skip_malformed = false;

  void attach(CLI::App* app) {
    app->add_option("--csv", csv, "Input CSV (overrides corpus.csv_path)");
    app->add_option("--text-column", text_column, "Text column name (overrides corpus.text_column)");
    app->add_flag("--dedup", dedup, "Collapse exact-duplicate texts");
    app->add_flag("--skip-malformed", skip_malformed, "Skip and count malformed rows instead of failing");
  }
  void apply(RunConfig& c) const {
    if (csv) c.corpus.csv_path = *csv;
    if (text_column) c.corpus.text_column = *text_column;
    if (dedup) c.corpus.dedup = true;
    if (skip_malformed) c.corpus.skip_malformed = true;
  }
};

class Session {
 public:
  Session(RunConfig config, std::string command, std::ostream& out)
      : config_(std::move(config)), command_(std::move(command)), out_(out) {
    snapshot_ = config_snapshot(config_);
    hash_ = topics::config_hash(snapshot_);
    const fs::path root = config_.artifact_dir;
    fs::create_directories(root);
    std::size_t counter = 1;
    const std::string prefix = hash_.substr(0, 12) + "-";
    for (const auto& entry : fs::directory_iterator(root)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_directory() && name.rfind(prefix, 0) == 0) {
        try {
          counter = std::max(counter, std::stoul(name.substr(prefix.size())) + 1);
        } catch (const std::exception&) {
        }
      }
    }
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%04zu", counter);
    run_id_ = prefix + suffix;
    run_dir_ = root / run_id_;
    fs::create_directories(run_dir_);
    write_json_file(run_dir_ / "config.json", snapshot_);
    envelope_ = {{"run_id", run_id_}, {"command", command_}, {"config_hash", hash_},
                 {"started_at", agent::utc_timestamp()}};
  }

  const RunConfig& config() const { return config_; }
  const json& snapshot() const { return snapshot_; }
  const std::string& hash() const { return hash_; }
  const fs::path& dir() const { return run_dir_; }
  std::ostream& out() { return out_; }

  json summary(json fields) {
    envelope_["finished_at"] = agent::utc_timestamp();
    write_json_file(run_dir_ / "envelope.json", envelope_);
    json line{{"command", command_}, {"status", "ok"}, {"run_id", run_id_}, {"run_dir", run_dir_.string()}};
    line.update(fields);
    return line;
  }

 private:
  RunConfig config_;
  std::string command_;
  std::ostream& out_;
  json snapshot_;
  std::string hash_;
  std::string run_id_;
  fs::path run_dir_;
  json envelope_;
};

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct Ingested {
  corpus::IngestResult ingest;
  std::vector<corpus::Chunk> chunks;
};

Ingested ingest_stage(Session& s) {
  return in_stage("ingest", [&] {
    const auto& c = s.config().corpus;
    if (c.csv_path.empty()) throw Error(ErrorCode::Config, "no corpus: set corpus.csv_path or --csv");
    corpus::IngestOptions options;
    options.text_column = c.text_column;
    options.id_column = c.id_column;
    options.dedup = c.dedup;
    options.skip_malformed = c.skip_malformed;
    Ingested out;
    out.ingest = corpus::ingest_csv(c.csv_path, options);
    out.chunks = corpus::chunk_all(out.ingest.documents, s.config().chunking);
    json manifest = corpus::manifest_json(out.ingest.documents, out.chunks);
    manifest["source"] = c.csv_path;
    manifest["duplicates_collapsed"] = out.ingest.duplicates_collapsed;
    manifest["empty_rows_skipped"] = out.ingest.empty_rows_skipped;
    manifest["malformed_rows_skipped"] = out.ingest.malformed_rows_skipped;
    manifest["dedup"] = c.dedup;
    write_json_file(s.dir() / "manifest.json", manifest);
    return out;
  });
}

KnowledgeBase index_stage(Session& s, const Ingested& ingested) {
  return in_stage("index", [&] {
    const auto embedder = embedding::make_embedder(s.config().index_embedder);
    auto kb = build_knowledge_base(ingested.chunks, *embedder);
    save_knowledge_base(s.dir(), ingested.chunks, kb);
    return kb;
  });
}

KnowledgeBase load_index(const fs::path& dir, const RunConfig& config) {
  return in_stage("load-index", [&] { return load_knowledge_base(dir, config.index_embedder.model_name); });
}

topics::ClientFactory client_factory(const RunConfig& config) {
  if (config.llm.backend == "http") {
    const auto http = config.llm.http;
    return [http](std::size_t) { return std::make_unique<llm::HttpChatClient>(http); };
  }
  if (config.llm.script_path.empty()) throw Error(ErrorCode::Config, "scripted backend needs llm.script_path");
  const json script = read_json_file(config.llm.script_path);
  if (script.is_object() && script.contains("rounds")) {
    const auto rounds = script.at("rounds").get<std::vector<std::vector<std::string>>>();
    return [rounds](std::size_t round) -> std::unique_ptr<llm::ChatClient> {
      if (round == 0 || round > rounds.size()) {
        throw Error(ErrorCode::ScriptExhausted, "script has no responses for round " + std::to_string(round));
      }
      return std::make_unique<llm::ScriptedChatClient>(rounds[round - 1]);
    };
  }
  auto shared = llm::Script::from_json(script);
  return [shared](std::size_t) { return std::make_unique<llm::ScriptedChatClient>(shared); };
}

std::string pad(std::string text, std::size_t width) {
  const std::size_t len = utf8::length(text);
  if (len < width) text.append(width - len, ' ');
  return text;
}

std::string rounds_table(const std::vector<topics::RoundResult>& rounds) {
  std::size_t rows = 0;
  std::size_t width = 8;
  for (const auto& r : rounds) {
    rows = std::max(rows, r.topics.size());
    for (const auto& t : r.topics) width = std::max(width, utf8::length(t.label));
  }
  std::ostringstream out;
  out << pad("Topic", 6);
  for (const auto& r : rounds) out << "  " << pad("Round " + std::to_string(r.round_number), width);
  out << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    out << pad(std::to_string(i + 1), 6);
    for (const auto& r : rounds) out << "  " << pad(i < r.topics.size() ? r.topics[i].label : "", width);
    out << "\n";
  }
  return out.str();
}

void write_reports(const fs::path& dir, const std::string& name, const json& machine, const std::string& csv,
                   const std::string& table) {
  write_json_file(dir / "reports" / (name + ".json"), machine);
  write_text_file(dir / "reports" / (name + ".csv"), csv);
  write_text_file(dir / "reports" / (name + ".txt"), table);
}

// ---------------------------------------------------------------------------

json cmd_ingest(Session& s) {
  const auto ingested = ingest_stage(s);
  return s.summary({{"documents", ingested.ingest.documents.size()},
                    {"chunks", ingested.chunks.size()},
                    {"duplicates_collapsed", ingested.ingest.duplicates_collapsed},
                    {"malformed_rows_skipped", ingested.ingest.malformed_rows_skipped}});
}

json cmd_index(Session& s) {
  const auto ingested = ingest_stage(s);
  const auto kb = index_stage(s, ingested);
  return s.summary({{"records", kb.store->size()},
                    {"dim", kb.store->dim()},
                    {"model_name", kb.store->info().model_name},
                    {"index", (s.dir() / "index.agvs").string()}});
}

json cmd_run(Session& s, const std::optional<std::string>& index_dir) {
  KnowledgeBase kb;
  json run_info{{"config_hash", s.hash()}};
  if (index_dir) {
    kb = load_index(*index_dir, s.config());
    run_info["manifest_ref"] = (fs::path(*index_dir) / "manifest.json").string();
    run_info["index_ref"] = (fs::path(*index_dir) / "index.agvs").string();
  } else {
    kb = index_stage(s, ingest_stage(s));
    run_info["manifest_ref"] = "manifest.json";
    run_info["index_ref"] = "index.agvs";
  }

  const auto& c = s.config();
  topics::RoundContext ctx;
  ctx.kb = kb;
  ctx.embedder = in_stage("run", [&] { return std::shared_ptr<const embedding::Embedder>(embedding::make_embedder(c.index_embedder)); });
  ctx.client_factory = in_stage("run", [&] { return client_factory(c); });
  ctx.topics = c.topics;
  ctx.limits = c.agent;
  ctx.retriever.k = c.retriever_k;
  ctx.completion = c.llm.params;
  ctx.config_snapshot = s.snapshot();
  ctx.artifact_dir = s.dir();

  const auto outcomes = in_stage("run", [&] { return topics::run_rounds(ctx, c.topics.rounds, c.parallel_rounds); });

  json rounds = json::array();
  std::size_t failed = 0;
  std::vector<topics::RoundResult> results;
  for (const auto& o : outcomes) {
    json entry{{"round", o.round_number}, {"status", o.ok() ? "ok" : "failed"}, {"transcripts", o.transcript_refs}};
    if (!o.ok()) {
      ++failed;
      entry["error"] = o.error_message;
      entry["error_code"] = o.error_code ? std::string(error_code_name(*o.error_code)) : "";
    } else {
      results.push_back(*o.result);
    }
    rounds.push_back(std::move(entry));
  }
  run_info["rounds"] = rounds;
  write_json_file(s.dir() / "run.json", run_info);
  if (!results.empty()) s.out() << rounds_table(results);
  if (failed > 0) {
    throw StageError("run", std::to_string(failed) + " of " + std::to_string(outcomes.size()) + " rounds failed");
  }
  return s.summary({{"rounds", outcomes.size()}, {"failed", failed}});
}

json cmd_validity(Session& s, const std::string& index_dir, const std::vector<std::string>& topic_files,
                  const std::optional<std::string>& rounds_dir) {
  const auto kb = in_stage("load-index", [&] { return load_knowledge_base(index_dir); });
  std::vector<eval::TopicList> lists;
  in_stage("load-topics", [&] {
    for (const auto& f : topic_files) {
      auto loaded = eval::load_topic_lists(f);
      lists.insert(lists.end(), loaded.begin(), loaded.end());
    }
    if (rounds_dir) {
      auto loaded = eval::load_topic_lists_dir(*rounds_dir);
      lists.insert(lists.end(), loaded.begin(), loaded.end());
    }
    if (lists.empty()) throw Error(ErrorCode::InvalidArgument, "no topic lists given (--topics or --rounds-dir)");
    return 0;
  });
  const auto reports = in_stage("eval-validity", [&] {
    const auto embedder = embedding::make_embedder(s.config().eval_embedder);
    bool reembedded = false;
    const auto aligned = eval::align_knowledge_base(kb, *embedder, &reembedded);
    std::vector<eval::ValidityReport> out;
    for (const auto& l : lists) {
      auto r = eval::validity(l, aligned, *embedder, s.config().eval);
      r.corpus_reembedded = reembedded;
      out.push_back(std::move(r));
    }
    return out;
  });
  json machine = json::array();
  for (const auto& r : reports) machine.push_back(eval::to_json(r));
  const std::string table = eval::validity_table(reports);
  write_reports(s.dir(), "validity", machine, eval::validity_csv(reports), table);
  s.out() << table;
  json scores = json::object();
  for (const auto& r : reports) scores[r.method_name] = r.weighted_score;
  return s.summary({{"scores", scores}});
}

json cmd_reliability(Session& s, const std::string& rounds_dir, std::size_t anchor, bool full_matrix) {
  const auto lists = in_stage("load-topics", [&] { return eval::load_topic_lists_dir(rounds_dir); });
  const auto report = in_stage("eval-reliability", [&] {
    if (anchor == 0 || anchor > lists.size()) throw Error(ErrorCode::InvalidArgument, "anchor out of range");
    const auto embedder = embedding::make_embedder(s.config().eval_embedder);
    return eval::reliability(lists, *embedder, anchor - 1, full_matrix);
  });
  const std::string table = eval::reliability_table(report);
  write_reports(s.dir(), "reliability", eval::to_json(report), eval::reliability_csv(report), table);
  s.out() << table;
  json scores = json::object();
  for (const auto& p : report.scores_vs_anchor) scores[p.anchor + "->" + p.other] = p.score;
  return s.summary({{"pairs", report.scores_vs_anchor.size()}, {"scores", scores}});
}

struct LdaFlags {
  std::optional<std::size_t> topics;
  std::optional<std::size_t> iterations;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::size_t top_n = 2;
  bool no_stem = false;
  std::size_t min_doc_freq = 2;
};

json cmd_lda(Session& s, const LdaFlags& flags) {
  const auto ingested = ingest_stage(s);
  const auto corpus = in_stage("lda-preprocess", [&] {
    std::vector<std::string> texts;
    for (const auto& d : ingested.ingest.documents) texts.push_back(d.text);
    lda::PreprocessOptions options;
    options.stem = !flags.no_stem;
    options.min_doc_freq = flags.min_doc_freq;
    return lda::preprocess(texts, options);
  });
  const auto model = in_stage("lda-fit", [&] {
    lda::LdaParams params;
    params.topics = flags.topics.value_or(s.config().topics.k);
    params.iterations = flags.iterations.value_or(params.iterations);
    params.alpha = flags.alpha;
    params.beta = flags.beta.value_or(params.beta);
    params.seed = s.config().seed;
    return lda::fit_gibbs(corpus, params);
  });
  const auto labels = lda::topic_labels(model, flags.top_n, s.config().topics.word_limit);
  eval::TopicList list{"lda_baseline", {}};
  std::ostringstream table;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    list.labels.push_back(labels[k].label);
    table << "Topic " << labels[k].index << ": ";
    const auto words = lda::top_words(model, k, 8);
    for (std::size_t i = 0; i < words.size(); ++i) table << (i ? " " : "") << words[i];
    table << "\n";
  }
  write_json_file(s.dir() / "lda_model.json", lda::to_json(model));
  write_json_file(s.dir() / "lda_topics.json", eval::to_json(list));
  s.out() << table.str();
  return s.summary({{"topics", labels.size()}, {"vocab", model.vocab.size()}, {"tokens", corpus.token_count()},
                    {"topics_file", (s.dir() / "lda_topics.json").string()}});
}

json cmd_compare(Session& s, const std::string& index_dir, const std::vector<std::string>& fixture_files,
                 const std::optional<std::string>& rounds_dir) {
  const auto kb = in_stage("load-index", [&] { return load_knowledge_base(index_dir); });
  std::vector<eval::TopicList> lists;
  in_stage("load-topics", [&] {
    for (const auto& f : fixture_files) {
      auto loaded = eval::load_topic_lists(f);
      lists.insert(lists.end(), loaded.begin(), loaded.end());
    }
    if (rounds_dir) {
      auto loaded = eval::load_topic_lists_dir(*rounds_dir);
      lists.insert(lists.end(), loaded.begin(), loaded.end());
    }
    return 0;
  });
  const auto reports = in_stage("compare", [&] {
    const auto embedder = embedding::make_embedder(s.config().eval_embedder);
    return eval::compare_methods(lists, kb, *embedder, s.config().eval);
  });
  json machine = json::array();
  for (const auto& r : reports) machine.push_back(eval::to_json(r));
  const std::string table = eval::validity_table(reports);
  write_reports(s.dir(), "compare", machine, eval::validity_csv(reports), table);
  s.out() << table;
  json order = json::array();
  for (const auto& r : reports) order.push_back(r.method_name);
  return s.summary({{"methods", reports.size()}, {"ranking", order}});
}

json cmd_report(Session& s, const std::string& run_dir) {
  const std::string text = in_stage("report", [&] {
    const fs::path dir = run_dir;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "no such run directory: " + run_dir);
    std::ostringstream out;
    out << "Run directory: " << dir.string() << "\n";
    if (fs::exists(dir / "envelope.json")) {
      const auto env = read_json_file(dir / "envelope.json");
      out << "Command: " << env.value("command", "") << "  run_id: " << env.value("run_id", "")
          << "  config_hash: " << env.value("config_hash", "") << "\n";
    }
    if (fs::exists(dir / "manifest.json")) {
      const auto m = read_json_file(dir / "manifest.json");
      out << "Corpus: " << m.value("document_count", 0) << " documents, " << m.value("chunk_count", 0)
          << " chunks\n";
    }

    std::vector<topics::RoundResult> rounds;
    if (fs::is_directory(dir / "rounds")) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir / "rounds")) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) rounds.push_back(topics::round_result_from_json(read_json_file(f)));
      std::sort(rounds.begin(), rounds.end(),
                [](const auto& a, const auto& b) { return a.round_number < b.round_number; });
    }
    if (!rounds.empty()) out << "\nTopics by round\n" << rounds_table(rounds);

    if (fs::is_directory(dir / "transcripts")) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir / "transcripts")) {
        const auto name = e.path().filename().string();
        if (name.size() > 5 && name.find(".envelope.") == std::string::npos) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        out << "\n##### Transcript " << f.stem().string() << "\n";
        out << agent::render_thoughts(agent::transcript_from_json(read_json_file(f)));
      }
    }
    if (fs::is_directory(dir / "reports")) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir / "reports")) {
        if (e.path().extension() == ".txt") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out << "\n##### Report " << f.stem().string() << "\n" << read_text_file(f);
    }
    return out.str();
  });
  write_text_file(s.dir() / "report.txt", text);
  s.out() << text;
  return s.summary({{"source", run_dir}, {"rounds", fs::is_directory(fs::path(run_dir) / "rounds")}});
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"agrag: agentic retrieval-augmented topic modeling and topic-quality evaluation"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> artifact_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run config file")->check(CLI::ExistingFile);
  app.add_option("--artifact-dir", artifact_dir, "Root directory for run artifacts");
  app.add_option("--seed", seed, "Run seed (LDA sampling)");

  CorpusFlags corpus_flags;

  auto* ingest = app.add_subcommand("ingest", "CSV -> document/chunk manifest");
  corpus_flags.attach(ingest);

  auto* index = app.add_subcommand("index", "Ingest, chunk, embed and persist the vector index");
  CorpusFlags index_flags;
  index_flags.attach(index);

  auto* run = app.add_subcommand("run", "Run N agent topic-modeling rounds");
  CorpusFlags run_flags;
  run_flags.attach(run);
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> parallel;
  std::optional<std::string> run_index;
  std::optional<std::string> script;
  std::optional<std::string> subject;
  std::optional<std::size_t> k;
  run->add_option("--rounds", rounds, "Number of rounds (topics.rounds)");
  run->add_option("--parallel", parallel, "Rounds run concurrently (parallel_rounds)");
  run->add_option("--index", run_index, "Reuse the index in this run directory");
  run->add_option("--script", script, "Scripted LLM responses; selects the scripted backend");
  run->add_option("--subject", subject, "Topic subject (topics.subject)");
  run->add_option("--k", k, "Topics per round (topics.k)");

  auto* eval_cmd = app.add_subcommand("eval", "Topic-quality metrics");
  eval_cmd->require_subcommand(1);
  auto* validity = eval_cmd->add_subcommand("validity", "Weighted reverse-retrieval relevance");
  std::string validity_index;
  std::vector<std::string> validity_topics;
  std::optional<std::string> validity_rounds;
  std::optional<double> floor;
  std::optional<std::size_t> cap;
  validity->add_option("--index", validity_index, "Run directory holding index.agvs and chunks.json")->required();
  validity->add_option("--topics", validity_topics, "Topic list files ({method_name, labels})");
  validity->add_option("--rounds-dir", validity_rounds, "Directory of round or topic list files");
  validity->add_option("--floor", floor, "Similarity floor (eval.floor)");
  validity->add_option("--cap", cap, "Max documents per topic (eval.cap)");

  auto* reliability = eval_cmd->add_subcommand("reliability", "Cross-round max-similarity consistency");
  std::string reliability_rounds;
  std::size_t anchor = 1;
  bool full_matrix = false;
  reliability->add_option("--rounds-dir", reliability_rounds, "Directory of round or topic list files")->required();
  reliability->add_option("--anchor", anchor, "1-based anchor round (default 1)");
  reliability->add_flag("--full-matrix", full_matrix, "Also compute every ordered pair");

  auto* baseline = app.add_subcommand("baseline", "Baseline topic models");
  baseline->require_subcommand(1);
  auto* lda_cmd = baseline->add_subcommand("lda", "Collapsed Gibbs LDA over the corpus");
  CorpusFlags lda_corpus;
  lda_corpus.attach(lda_cmd);
  LdaFlags lda_flags;
  lda_cmd->add_option("--num-topics", lda_flags.topics, "Topic count (default topics.k)");
  lda_cmd->add_option("--iterations", lda_flags.iterations, "Gibbs sweeps (default 500)");
  lda_cmd->add_option("--alpha", lda_flags.alpha, "Document-topic prior (default 50/K)");
  lda_cmd->add_option("--beta", lda_flags.beta, "Topic-word prior (default 0.01)");
  lda_cmd->add_option("--top-n", lda_flags.top_n, "Words per label (default 2)");
  lda_cmd->add_option("--min-doc-freq", lda_flags.min_doc_freq, "Minimum document frequency (default 2)");
  lda_cmd->add_flag("--no-stem", lda_flags.no_stem, "Disable suffix stemming");

  auto* compare = app.add_subcommand("compare", "Validity table across topic lists");
  std::string compare_index;
  std::vector<std::string> fixtures;
  std::optional<std::string> compare_rounds;
  compare->add_option("--index", compare_index, "Run directory holding index.agvs and chunks.json")->required();
  compare->add_option("--fixtures", fixtures, "Topic list files");
  compare->add_option("--rounds-dir", compare_rounds, "Add the rounds of a run directory");
  compare->add_option("--floor", floor, "Similarity floor (eval.floor)");
  compare->add_option("--cap", cap, "Max documents per topic (eval.cap)");

  auto* report = app.add_subcommand("report", "Render a run directory");
  std::string report_dir;
  report->add_option("--run-dir", report_dir, "Run directory to render")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  std::string command;
  try {
    RunConfig config = config_path ? load_config(*config_path) : default_config();
    if (artifact_dir) config.artifact_dir = *artifact_dir;
    if (seed) config.seed = *seed;
    if (floor) config.eval.floor = *floor;
    if (cap) config.eval.cap = *cap;

    json summary;
    if (ingest->parsed()) {
      corpus_flags.apply(config);
      command = "ingest";
      Session s(config, command, out);
      summary = cmd_ingest(s);
    } else if (index->parsed()) {
      index_flags.apply(config);
      command = "index";
      Session s(config, command, out);
      summary = cmd_index(s);
    } else if (run->parsed()) {
      run_flags.apply(config);
      if (rounds) config.topics.rounds = *rounds;
      if (parallel) config.parallel_rounds = std::max<std::size_t>(1, *parallel);
      if (subject) config.topics.subject = *subject;
      if (k) config.topics.k = *k;
      if (script) {
        config.llm.backend = "scripted";
        config.llm.script_path = *script;
      }
      if (config.topics.rounds == 0 || config.topics.k == 0) {
        err << "usage error: --rounds and --k must be positive\n";
        return 2;
      }
      command = "run";
      Session s(config, command, out);
      summary = cmd_run(s, run_index);
    } else if (validity->parsed()) {
      command = "eval validity";
      Session s(config, command, out);
      summary = cmd_validity(s, validity_index, validity_topics, validity_rounds);
    } else if (reliability->parsed()) {
      command = "eval reliability";
      Session s(config, command, out);
      summary = cmd_reliability(s, reliability_rounds, anchor, full_matrix);
    } else if (lda_cmd->parsed()) {
      lda_corpus.apply(config);
      command = "baseline lda";
      Session s(config, command, out);
      summary = cmd_lda(s, lda_flags);
    } else if (compare->parsed()) {
      command = "compare";
      Session s(config, command, out);
      summary = cmd_compare(s, compare_index, fixtures, compare_rounds);
    } else if (report->parsed()) {
      command = "report";
      Session s(config, command, out);
      summary = cmd_report(s, report_dir);
    }
    out << summary.dump() << "\n";
    return 0;
  } catch (const StageError& e) {
    err << "error: stage " << e.stage << ": " << e.what() << "\n";
    out << json{{"command", command}, {"status", "error"}, {"stage", e.stage}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: stage config: " << e.what() << "\n";
    out << json{{"command", command}, {"status", "error"}, {"stage", "config"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}

}  // namespace agrag::cli
