#include "agrag/agent.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <unordered_set>

#include "agrag/error.hpp"

namespace agrag::agent {

namespace {

// End (one past the closing brace) of the balanced JSON object starting at
// `open`, or npos when the braces never balance.
std::size_t balanced_object_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string format_score(double score) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", score);
  return buffer;
}

std::string truncate_chars(const std::string& text, std::size_t limit) {
  if (utf8::length(text) <= limit) return text;
  return utf8::substr(text, 0, limit) + "...";
}

// Maps a non-object action_input onto the tool's single parameter.
json normalize_arguments(const Tool& tool, const json& input) {
  if (input.is_object()) return input;
  if (tool.params.size() == 1) return json{{tool.params.front().name, input}};
  return json{{"input", input}};
}

std::optional<std::vector<std::string>> answer_list(const json& input) {
  const json* list = &input;
  if (input.is_object()) {
    if (!input.contains("answer")) return std::nullopt;
    list = &input.at("answer");
  }
  if (!list->is_array() || list->empty()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : *list) {
    if (!item.is_string()) return std::nullopt;
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

ToolRegistry::ToolRegistry() {
  tools_.push_back(Tool{std::string(kFinalAnswer),
                        "Give the final answer to the task and stop.",
                        {{"answer", "the complete answer, as a list of strings"}},
                        [](const json&) { return std::string(); }});
}

void ToolRegistry::add(Tool tool) {
  if (find(tool.name) != nullptr) throw Error(ErrorCode::InvalidArgument, "duplicate tool '" + tool.name + "'");
  tools_.push_back(std::move(tool));
}

const Tool* ToolRegistry::find(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string ToolRegistry::describe() const {
  std::string out;
  for (const auto& t : tools_) {
    out += "- " + t.name + "(";
    for (std::size_t i = 0; i < t.params.size(); ++i) {
      if (i) out += ", ";
      out += t.params[i].name;
    }
    out += "): " + t.description + "\n";
    for (const auto& p : t.params) out += "    " + p.name + ": " + p.description + "\n";
  }
  return out;
}

ParsedStep parse_step(std::string_view raw) {
  const std::size_t thought_pos = raw.find("Thought:");
  const std::size_t prose_begin = thought_pos == std::string_view::npos ? 0 : thought_pos + 8;
  const std::size_t action_token = raw.find("Action:", prose_begin);
  std::size_t scan = action_token == std::string_view::npos ? prose_begin : action_token + 7;

  std::string failure;
  bool saw_candidate = false;
  while (true) {
    const std::size_t open = raw.find('{', scan);
    if (open == std::string_view::npos) break;
    saw_candidate = true;
    const std::size_t close = balanced_object_end(raw, open);
    if (close == std::string_view::npos) {
      failure = "unbalanced braces in action block";
      break;
    }
    const auto candidate = raw.substr(open, close - open);
    json parsed = json::parse(candidate, nullptr, false);
    if (parsed.is_discarded()) {
      failure = "action block is not valid JSON";
    } else if (!parsed.is_object() || !parsed.contains("action") || !parsed.contains("action_input")) {
      failure = "action block lacks 'action' or 'action_input'";
    } else if (!parsed.at("action").is_string() || parsed.at("action").get<std::string>().empty()) {
      failure = "'action' must be a non-empty string";
    } else {
      const std::size_t prose_end = action_token == std::string_view::npos ? open : action_token;
      ParsedStep step;
      step.thought = trim(raw.substr(prose_begin, prose_end > prose_begin ? prose_end - prose_begin : 0));
      step.action.tool_name = parsed.at("action").get<std::string>();
      step.action.arguments = parsed.at("action_input");
      return step;
    }
    scan = open + 1;
  }
  if (!saw_candidate) {
    if (action_token != std::string_view::npos) {
      throw Error(ErrorCode::MalformedAction, "'Action:' is not followed by a JSON object");
    }
    throw Error(ErrorCode::NoActionBlock, "no action block in model output");
  }
  throw Error(ErrorCode::MalformedAction, failure);
}

std::string_view step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Thought: return "thought";
    case StepKind::ToolCall: return "tool_call";
    case StepKind::Observation: return "observation";
    case StepKind::FinalAnswer: return "final_answer";
    case StepKind::ParseError: return "parse_error";
  }
  return "thought";
}

StepKind step_kind_from_name(std::string_view name) {
  for (auto k : {StepKind::Thought, StepKind::ToolCall, StepKind::Observation, StepKind::FinalAnswer,
                 StepKind::ParseError}) {
    if (step_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown step kind '" + std::string(name) + "'");
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::MaxStepsExceeded: return "max_steps_exceeded";
    case Outcome::Aborted: return "aborted";
  }
  return "aborted";
}

std::vector<StepKind> Transcript::kinds() const {
  std::vector<StepKind> out;
  for (const auto& s : steps) out.push_back(s.kind);
  return out;
}

std::size_t Transcript::count(StepKind kind) const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.kind == kind ? 1 : 0;
  return n;
}

std::optional<std::vector<std::string>> Transcript::final_answer() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->kind == StepKind::FinalAnswer) return it->payload.at("answer").get<std::vector<std::string>>();
  }
  return std::nullopt;
}

json to_json(const Transcript& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json step{{"ordinal", s.ordinal}, {"kind", step_kind_name(s.kind)}};
    step["payload"] = s.payload;
    steps.push_back(std::move(step));
  }
  json out{{"config", t.config},
           {"outcome", outcome_name(t.outcome)},
           {"steps", std::move(steps)},
           {"exchanges", t.exchanges}};
  if (t.error_code) {
    out["error"] = {{"code", error_code_name(*t.error_code)}, {"message", t.error_message}};
  }
  return out;
}

Transcript transcript_from_json(const json& v) {
  Transcript t;
  t.config = v.value("config", json::object());
  const auto outcome = v.at("outcome").get<std::string>();
  for (auto o : {Outcome::Success, Outcome::MaxStepsExceeded, Outcome::Aborted}) {
    if (outcome_name(o) == outcome) t.outcome = o;
  }
  for (const auto& s : v.at("steps")) {
    t.steps.push_back({s.at("ordinal").get<std::size_t>(), step_kind_from_name(s.at("kind").get<std::string>()),
                       s.at("payload")});
  }
  t.exchanges = v.value("exchanges", json::array());
  if (v.contains("error")) t.error_message = v.at("error").value("message", "");
  return t;
}

json to_json(const Envelope& e) {
  return json{{"run_id", e.run_id},
              {"started_at", e.started_at},
              {"finished_at", e.finished_at},
              {"config_hash", e.config_hash},
              {"notes", e.notes}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string render_thoughts(const Transcript& t) {
  std::ostringstream out;
  for (const auto& s : t.steps) {
    switch (s.kind) {
      case StepKind::Thought:
        out << "=== Agent thoughts:\nThought: " << s.payload.value("text", "") << "\n";
        break;
      case StepKind::ToolCall:
        out << ">>> Calling tool: '" << s.payload.value("tool", "") << "' with arguments: "
            << s.payload.value("arguments", json::object()).dump() << "\n";
        break;
      case StepKind::Observation:
        out << s.payload.value("text", "") << "\n";
        break;
      case StepKind::FinalAnswer:
        out << ">>> Calling tool: 'final_answer' with arguments: "
            << json{{"answer", s.payload.value("answer", json::array())}}.dump() << "\n";
        break;
      case StepKind::ParseError:
        out << "!!! " << s.payload.value("error_code", "") << ": " << s.payload.value("detail", "") << "\n";
        break;
    }
  }
  out << "=== Outcome: " << outcome_name(t.outcome);
  if (t.error_code || !t.error_message.empty()) out << " (" << t.error_message << ")";
  out << "\n";
  return out.str();
}

AgentRun run(const RunRequest& request, const ToolRegistry& tools, llm::ChatClient& client) {
  if (request.limits.max_steps == 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
  if (tools.find(kFinalAnswer) == nullptr) throw Error(ErrorCode::InvalidArgument, "registry lacks final_answer");

  AgentRun result;
  Transcript& t = result.transcript;
  t.config = request.config;

  std::vector<llm::ChatMessage> messages;
  if (!request.system_prompt.empty()) messages.push_back({llm::Role::System, request.system_prompt});
  messages.push_back({llm::Role::User, request.task_prompt});

  const auto add_step = [&](StepKind kind, json payload) {
    t.steps.push_back({t.steps.size(), kind, std::move(payload)});
  };
  const auto finish = [&](Outcome outcome, std::optional<ErrorCode> code, std::string message) {
    t.outcome = outcome;
    t.error_code = code;
    t.error_message = std::move(message);
    return result;
  };

  std::size_t tool_calls = 0;
  std::size_t parse_retries = 0;

  while (true) {
    json exchange{{"ordinal", t.exchanges.size()}, {"request", llm::to_json(messages)}};
    std::string raw;
    try {
      raw = client.complete(messages, request.params);
      exchange["response"] = raw;
      t.exchanges.push_back(std::move(exchange));
    } catch (const Error& e) {
      exchange["error"] = e.what();
      t.exchanges.push_back(std::move(exchange));
      return finish(Outcome::Aborted, e.code(), e.what());
    }

    // Returns true when the run should stop.
    const auto parse_failure = [&](ErrorCode code, const std::string& detail) {
      add_step(StepKind::ParseError,
               {{"error_code", error_code_name(code)}, {"detail", detail}, {"raw_output", raw}});
      if (parse_retries >= request.limits.max_parse_retries) {
        finish(Outcome::Aborted, code, "parse retries exhausted: " + detail);
        return true;
      }
      ++parse_retries;
      messages.push_back({llm::Role::Assistant, raw});
      messages.push_back({llm::Role::User,
                          "Error: your last reply could not be executed (" + detail +
                              "). Reply with 'Thought:' followed by 'Action:' and a single JSON object "
                              "with the keys \"action\" and \"action_input\"."});
      return false;
    };

    ParsedStep step;
    try {
      step = parse_step(raw);
    } catch (const Error& e) {
      if (parse_failure(e.code(), e.what())) return result;
      continue;
    }
    add_step(StepKind::Thought, {{"text", step.thought}});

    if (step.action.tool_name == kFinalAnswer) {
      auto answer = answer_list(step.action.arguments);
      if (!answer) {
        if (parse_failure(ErrorCode::MalformedAction, "final_answer needs {\"answer\": [strings]}")) return result;
        continue;
      }
      add_step(StepKind::FinalAnswer, {{"answer", *answer}});
      result.answer = std::move(answer);
      return finish(Outcome::Success, std::nullopt, "");
    }

    const Tool* tool = tools.find(step.action.tool_name);
    const json arguments = tool ? normalize_arguments(*tool, step.action.arguments) : step.action.arguments;
    add_step(StepKind::ToolCall, {{"tool", step.action.tool_name}, {"arguments", arguments}});
    if (tool == nullptr) {
      if (parse_failure(ErrorCode::UnknownTool, "unknown tool '" + step.action.tool_name + "'")) return result;
      continue;
    }

    std::string observation;
    try {
      observation = tool->invoke(arguments);
    } catch (const std::exception& e) {
      observation = std::string("Error: ") + e.what();
    }
    add_step(StepKind::Observation, {{"text", observation}});
    ++tool_calls;
    messages.push_back({llm::Role::Assistant, raw});
    messages.push_back({llm::Role::User, "Observation:\n" + observation});

    if (tool_calls >= request.limits.max_steps) {
      return finish(Outcome::MaxStepsExceeded, ErrorCode::MaxStepsExceeded,
                    "no final answer after " + std::to_string(tool_calls) + " tool calls");
    }
  }
}

std::string default_system_prompt(const ToolRegistry& tools) {
  std::string out =
      "You are a research assistant that analyses a text collection through a retrieval tool.\n"
      "You can use these tools:\n" +
      tools.describe() +
      "\nAnswer every turn in exactly this format:\n"
      "Thought: <your reasoning about what to do next>\n"
      "Action:\n"
      "{\n"
      "  \"action\": \"<tool name>\",\n"
      "  \"action_input\": {<arguments>}\n"
      "}\n"
      "\nAfter each observation, check the retrieved documents before answering. Query again with a "
      "reformulated request if the results:\n"
      "- do not yet cover the whole task,\n"
      "- disagree with each other on facts,\n"
      "- are unclear or contradict each other.\n"
      "Base the answer only on retrieved documents. When the evidence is sufficient, call final_answer.\n";
  return out;
}

Tool retriever_tool(KnowledgeBase kb, std::shared_ptr<const embedding::Embedder> embedder, RetrieverOptions options) {
  if (!kb.store || kb.store->empty()) throw Error(ErrorCode::InvalidArgument, "retriever needs a non-empty store");
  if (options.k == 0) throw Error(ErrorCode::InvalidArgument, "retriever k must be positive");
  auto seen = std::make_shared<std::unordered_set<std::string>>();

  Tool tool;
  tool.name = std::string(kRetriever);
  tool.description =
      "Semantic search over the indexed documents. Returns the most similar documents not already "
      "retrieved in this session.";
  tool.params = {{"query", "a search request phrased close to the wording of the documents you look for"}};
  tool.invoke = [kb = std::move(kb), embedder = std::move(embedder), options, seen](const json& args) {
    if (!args.contains("query") || !args.at("query").is_string()) {
      return std::string("Error: retriever expects {\"query\": string}");
    }
    const std::string query = args.at("query").get<std::string>();
    std::vector<vectorstore::SearchHit> hits;
    try {
      hits = kb.store->search(embedder->embed(query), options.k);
    } catch (const std::exception& e) {
      return std::string("Retriever error: ") + e.what();
    }
    std::string out = "Retrieved documents:\n";
    std::size_t shown = 0;
    std::size_t suppressed = 0;
    for (const auto& hit : hits) {
      if (!seen->insert(hit.chunk_id).second) {
        ++suppressed;
        continue;
      }
      ++shown;
      out += "Document " + std::to_string(shown) + " (score " + format_score(hit.score) +
             "): " + truncate_chars(kb.text_of(hit.chunk_id), options.max_chunk_chars) + "\n";
    }
    if (shown == 0) out += "No new documents.\n";
    if (suppressed > 0) {
      out += std::to_string(suppressed) + " previously retrieved document" + (suppressed == 1 ? "" : "s") +
             " suppressed\n";
    }
    return out;
  };
  return tool;
}

}  // namespace agrag::agent
