#include "run_config.hpp"

#include "agrag/error.hpp"

namespace agrag::cli {

namespace {

void reject_unknown_keys(const json& defaults, const json& given, const std::string& path) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!defaults.is_object() || !defaults.contains(key)) {
      throw Error(ErrorCode::Config, "unknown config key '" + where + "'");
    }
    if (defaults.at(key).is_object()) reject_unknown_keys(defaults.at(key), value, where);
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.eval_embedder.model_name = "hash-trigram-v1";
  return c;
}

json to_json(const RunConfig& c) {
  json corpus{{"csv_path", c.corpus.csv_path},
              {"text_column", c.corpus.text_column},
              {"id_column", c.corpus.id_column ? json(*c.corpus.id_column) : json(nullptr)},
              {"dedup", c.corpus.dedup},
              {"skip_malformed", c.corpus.skip_malformed}};
  json llm{{"backend", c.llm.backend},
           {"script_path", c.llm.script_path},
           {"base_url", c.llm.http.base_url},
           {"api_key_env", c.llm.http.api_key_env},
           {"timeout_ms", c.llm.http.timeout.count()},
           {"retry", {{"attempts", c.llm.http.retry.attempts}, {"base_delay_ms", c.llm.http.retry.base_delay.count()}}}};
  llm.update(llm::to_json(c.llm.params));
  return json{{"corpus", std::move(corpus)},
              {"chunking",
               {{"max_chars", c.chunking.max_chars},
                {"overlap_chars", c.chunking.overlap_chars},
                {"prefer_sentence_boundaries", c.chunking.prefer_sentence_boundaries}}},
              {"index_embedder", embedding::to_json(c.index_embedder)},
              {"eval_embedder", embedding::to_json(c.eval_embedder)},
              {"llm", std::move(llm)},
              {"agent",
               {{"max_steps", c.agent.max_steps},
                {"max_parse_retries", c.agent.max_parse_retries},
                {"retriever_k", c.retriever_k}}},
              {"topics",
               {{"k", c.topics.k},
                {"word_limit", c.topics.word_limit},
                {"subject", c.topics.subject},
                {"rounds", c.topics.rounds}}},
              {"eval", {{"floor", c.eval.floor}, {"cap", c.eval.cap}}},
              {"seed", c.seed},
              {"artifact_dir", c.artifact_dir},
              {"parallel_rounds", c.parallel_rounds}};
}

RunConfig config_from_json(const json& given) {
  const json defaults = to_json(default_config());
  reject_unknown_keys(defaults, given, "");
  json v = defaults;
  v.merge_patch(given);

  RunConfig c = default_config();
  try {
    const auto& corpus = v.at("corpus");
    c.corpus.csv_path = corpus.at("csv_path").get<std::string>();
    c.corpus.text_column = corpus.at("text_column").get<std::string>();
    if (corpus.contains("id_column") && !corpus.at("id_column").is_null()) {
      c.corpus.id_column = corpus.at("id_column").get<std::string>();
    }
    c.corpus.dedup = corpus.at("dedup").get<bool>();
    c.corpus.skip_malformed = corpus.at("skip_malformed").get<bool>();

    const auto& chunking = v.at("chunking");
    c.chunking.max_chars = chunking.at("max_chars").get<std::size_t>();
    c.chunking.overlap_chars = chunking.at("overlap_chars").get<std::size_t>();
    c.chunking.prefer_sentence_boundaries = chunking.at("prefer_sentence_boundaries").get<bool>();
    if (c.chunking.max_chars <= c.chunking.overlap_chars) {
      throw Error(ErrorCode::Config, "chunking.max_chars must exceed chunking.overlap_chars");
    }

    c.index_embedder = embedding::embedder_config_from_json(v.at("index_embedder"), c.index_embedder);
    c.eval_embedder = embedding::embedder_config_from_json(v.at("eval_embedder"), c.eval_embedder);

    const auto& llm = v.at("llm");
    c.llm.backend = llm.at("backend").get<std::string>();
    if (c.llm.backend != "http" && c.llm.backend != "scripted") {
      throw Error(ErrorCode::Config, "llm.backend must be 'http' or 'scripted'");
    }
    c.llm.script_path = llm.at("script_path").get<std::string>();
    c.llm.http.base_url = llm.at("base_url").get<std::string>();
    c.llm.http.api_key_env = llm.at("api_key_env").get<std::string>();
    c.llm.http.timeout = std::chrono::milliseconds(llm.at("timeout_ms").get<long>());
    c.llm.http.retry.attempts = llm.at("retry").at("attempts").get<int>();
    c.llm.http.retry.base_delay = std::chrono::milliseconds(llm.at("retry").at("base_delay_ms").get<long>());
    c.llm.params = llm::completion_params_from_json(llm, c.llm.params);

    const auto& agent = v.at("agent");
    c.agent.max_steps = agent.at("max_steps").get<std::size_t>();
    c.agent.max_parse_retries = agent.at("max_parse_retries").get<std::size_t>();
    c.retriever_k = agent.at("retriever_k").get<std::size_t>();
    if (c.agent.max_steps == 0 || c.retriever_k == 0) {
      throw Error(ErrorCode::Config, "agent.max_steps and agent.retriever_k must be positive");
    }

    const auto& topics = v.at("topics");
    c.topics.k = topics.at("k").get<std::size_t>();
    c.topics.word_limit = topics.at("word_limit").get<std::size_t>();
    c.topics.subject = topics.at("subject").get<std::string>();
    c.topics.rounds = topics.at("rounds").get<std::size_t>();
    if (c.topics.k == 0 || c.topics.word_limit == 0 || c.topics.rounds == 0) {
      throw Error(ErrorCode::Config, "topics.k, topics.word_limit and topics.rounds must be positive");
    }

    c.eval.floor = v.at("eval").at("floor").get<double>();
    c.eval.cap = v.at("eval").at("cap").get<std::size_t>();
    if (c.eval.floor < -1.0 || c.eval.floor > 1.0 || c.eval.cap == 0) {
      throw Error(ErrorCode::Config, "eval.floor must lie in [-1, 1] and eval.cap must be positive");
    }
    c.seed = v.at("seed").get<std::uint64_t>();
    c.artifact_dir = v.at("artifact_dir").get<std::string>();
    c.parallel_rounds = std::max<std::size_t>(1, v.at("parallel_rounds").get<std::size_t>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

json config_snapshot(const RunConfig& config) {
  json snapshot = to_json(config);
  snapshot.erase("artifact_dir");
  return snapshot;
}

}  // namespace agrag::cli
