#include "agrag/topics.hpp"

#include <array>
#include <future>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "agrag/error.hpp"

namespace agrag::topics {

namespace {

std::string number_word(std::size_t n) {
  static constexpr std::array<const char*, 11> kWords = {"zero", "one", "two", "three", "four", "five",
                                                         "six",  "seven", "eight", "nine", "ten"};
  return n < kWords.size() ? kWords[n] : std::to_string(n);
}

std::size_t count_words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  std::string token;
  while (in >> token) ++n;
  return n;
}

std::string transcript_ref(const std::string& hash, std::size_t round, std::size_t attempt) {
  std::string ref = hash.substr(0, 12) + "-round-" + std::to_string(round);
  if (attempt > 1) ref += "-retry" + std::to_string(attempt - 1);
  return ref;
}

}  // namespace

std::vector<std::string> RoundResult::labels() const {
  std::vector<std::string> out;
  for (const auto& t : topics) out.push_back(t.label);
  return out;
}

json to_json(const RoundResult& r) {
  json topics = json::array();
  for (const auto& t : r.topics) {
    topics.push_back({{"index", t.index},
                      {"label", t.label},
                      {"word_count", t.word_count},
                      {"violates_word_limit", t.violates_word_limit}});
  }
  return json{{"round_number", r.round_number}, {"topics", std::move(topics)}, {"transcript_ref", r.transcript_ref},
              {"config_hash", r.config_hash},   {"attempts", r.attempts},     {"config_snapshot", r.config_snapshot}};
}

RoundResult round_result_from_json(const json& v) {
  RoundResult r;
  r.round_number = v.at("round_number").get<std::size_t>();
  for (const auto& t : v.at("topics")) {
    r.topics.push_back({t.at("index").get<std::size_t>(), t.at("label").get<std::string>(),
                        t.at("word_count").get<std::size_t>(), t.at("violates_word_limit").get<bool>()});
  }
  r.transcript_ref = v.value("transcript_ref", "");
  r.config_hash = v.value("config_hash", "");
  r.attempts = v.value("attempts", std::size_t{1});
  r.config_snapshot = v.value("config_snapshot", json::object());
  return r;
}

std::string build_task_prompt(const std::string& subject, std::size_t k, std::size_t word_limit) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (word_limit == 0) throw Error(ErrorCode::InvalidArgument, "word_limit must be >= 1");
  if (trim(subject).empty()) throw Error(ErrorCode::InvalidArgument, "subject must not be empty");

  const std::string words = number_word(word_limit) + (word_limit == 1 ? " word" : " words");
  std::string prompt;
  if (k == 1) {
    prompt = "Identify the single most relevant topic related to " + subject + " in the indexed data.";
  } else {
    prompt = "Identify the " + std::to_string(k) + " most relevant topics related to " + subject +
             " in the indexed data.";
  }
  prompt += " Each topic label must be no more than " + words + " (" + std::to_string(word_limit) +
            (word_limit == 1 ? " word" : " words") + " at most).\n";
  prompt +=
      "Use the 'retriever' tool several times with diverse phrasings of your query so that the whole "
      "collection is explored before you answer. Before answering, make sure the retrieved documents "
      "cover the whole task and agree on the facts without unclear or contradictory content; "
      "otherwise reformulate the query and retrieve again.\n";
  prompt += "Give the answer with the 'final_answer' tool as {\"answer\": [...]} holding exactly " +
            std::to_string(k) + (k == 1 ? " string" : " strings") + " formatted as \"Topic i: <label>\"";
  prompt += k == 1 ? ", i.e. \"Topic 1: <label>\".\n" : " for i = 1.." + std::to_string(k) + ".\n";
  return prompt;
}

std::string strip_topic_prefix(std::string_view entry) {
  static const std::regex kPrefix(R"(^\s*topic\s*\d+\s*[:.)\-]\s*)", std::regex::icase);
  return trim(std::regex_replace(std::string(entry), kPrefix, "", std::regex_constants::format_first_only));
}

std::vector<Topic> parse_topics(const std::vector<std::string>& answer, std::size_t k, std::size_t word_limit) {
  if (answer.size() != k) {
    throw Error(ErrorCode::WrongTopicCount,
                "expected " + std::to_string(k) + " topics, got " + std::to_string(answer.size()));
  }
  std::vector<Topic> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < answer.size(); ++i) {
    Topic t;
    t.index = i + 1;
    t.label = strip_topic_prefix(answer[i]);
    if (t.label.empty()) throw Error(ErrorCode::EmptyLabel, "topic " + std::to_string(i + 1) + " has no label");
    if (!seen.insert(ascii_lower(t.label)).second) throw Error(ErrorCode::DuplicateLabel, t.label);
    t.word_count = count_words(t.label);
    t.violates_word_limit = t.word_count > word_limit;
    out.push_back(std::move(t));
  }
  return out;
}

std::string config_hash(const json& config_snapshot) { return to_hex(fnv1a64(config_snapshot.dump())); }

RoundOutcome run_round(const RoundContext& ctx, std::size_t round_number) {
  if (!ctx.client_factory) throw Error(ErrorCode::InvalidArgument, "round context has no client factory");
  const std::string hash = config_hash(ctx.config_snapshot);
  const std::string task = build_task_prompt(ctx.topics.subject, ctx.topics.k, ctx.topics.word_limit);
  auto client = ctx.client_factory(round_number);

  RoundOutcome outcome;
  outcome.round_number = round_number;
  std::string rerun_reason;

  for (std::size_t attempt = 1; attempt <= 2; ++attempt) {
    agent::ToolRegistry registry;
    registry.add(agent::retriever_tool(ctx.kb, ctx.embedder, ctx.retriever));

    agent::RunRequest request;
    request.system_prompt = agent::default_system_prompt(registry);
    request.task_prompt = task;
    request.limits = ctx.limits;
    request.params = ctx.completion;
    request.config = {{"config_hash", hash}, {"round", round_number}, {"attempt", attempt},
                      {"config", ctx.config_snapshot}};

    agent::Envelope envelope;
    envelope.run_id = transcript_ref(hash, round_number, attempt);
    envelope.config_hash = hash;
    envelope.started_at = agent::utc_timestamp();
    auto run = agent::run(request, registry, *client);
    envelope.finished_at = agent::utc_timestamp();
    envelope.notes = {{"round", round_number}, {"attempt", attempt}};
    if (!rerun_reason.empty()) envelope.notes["rerun_after"] = rerun_reason;

    outcome.transcript_refs.push_back(envelope.run_id);
    if (ctx.artifact_dir) {
      const auto dir = *ctx.artifact_dir / "transcripts";
      write_json_file(dir / (envelope.run_id + ".json"), agent::to_json(run.transcript));
      write_json_file(dir / (envelope.run_id + ".envelope.json"), agent::to_json(envelope));
    }
    outcome.transcripts.push_back(run.transcript);

    if (!run.ok()) {
      outcome.error_code = run.transcript.error_code.value_or(ErrorCode::MaxStepsExceeded);
      outcome.error_message = run.transcript.error_message;
      return outcome;
    }
    try {
      RoundResult result;
      result.round_number = round_number;
      result.topics = parse_topics(*run.answer, ctx.topics.k, ctx.topics.word_limit);
      result.transcript_ref = envelope.run_id;
      result.config_hash = hash;
      result.config_snapshot = ctx.config_snapshot;
      result.attempts = attempt;
      if (ctx.artifact_dir) {
        write_json_file(*ctx.artifact_dir / "rounds" / ("round_" + std::to_string(round_number) + ".json"),
                        to_json(result));
      }
      outcome.result = std::move(result);
      outcome.error_code.reset();
      outcome.error_message.clear();
      return outcome;
    } catch (const Error& e) {
      outcome.error_code = e.code();
      outcome.error_message = e.what();
      if (e.code() != ErrorCode::WrongTopicCount) return outcome;
      rerun_reason = e.what();
    }
  }
  return outcome;
}

std::vector<RoundOutcome> run_rounds(const RoundContext& ctx, std::size_t n, std::size_t parallelism) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "rounds must be >= 1");
  parallelism = std::max<std::size_t>(parallelism, 1);

  const auto guarded = [&ctx](std::size_t round) {
    try {
      return run_round(ctx, round);
    } catch (const Error& e) {
      RoundOutcome failed;
      failed.round_number = round;
      failed.error_code = e.code();
      failed.error_message = e.what();
      return failed;
    }
  };

  std::vector<RoundOutcome> out;
  out.reserve(n);
  for (std::size_t first = 1; first <= n; first += parallelism) {
    const std::size_t last = std::min(n, first + parallelism - 1);
    if (first == last) {
      out.push_back(guarded(first));
      continue;
    }
    std::vector<std::future<RoundOutcome>> wave;
    for (std::size_t r = first; r <= last; ++r) wave.push_back(std::async(std::launch::async, guarded, r));
    for (auto& f : wave) out.push_back(f.get());
  }
  return out;
}

}  // namespace agrag::topics
