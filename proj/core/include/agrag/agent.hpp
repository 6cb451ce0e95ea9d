#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agrag/knowledge_base.hpp"
#include "agrag/llm.hpp"
#include "agrag/util.hpp"

namespace agrag::agent {

inline constexpr std::string_view kFinalAnswer = "final_answer";
inline constexpr std::string_view kRetriever = "retriever";

struct ToolParam {
  std::string name;
  std::string description;
};

struct Tool {
  std::string name;
  std::string description;
  std::vector<ToolParam> params;
  std::function<std::string(const json& arguments)> invoke;
};

// Name-unique tool set. final_answer is always present and handled by the
// loop itself rather than invoked.
class ToolRegistry {
 public:
  ToolRegistry();

  void add(Tool tool);  // throws InvalidArgument on a duplicate name
  const Tool* find(std::string_view name) const;
  const std::vector<Tool>& tools() const noexcept { return tools_; }

  // One line per tool: name(params): description
  std::string describe() const;

 private:
  std::vector<Tool> tools_;
};

struct Action {
  std::string tool_name;
  json arguments;
};

struct ParsedStep {
  std::string thought;
  Action action;
};

// Extracts the prose after "Thought:" and the first balanced JSON object
// (after "Action:" when that token is present) holding `action` and
// `action_input`. Throws NoActionBlock or MalformedAction.
ParsedStep parse_step(std::string_view raw_model_output);

enum class StepKind { Thought, ToolCall, Observation, FinalAnswer, ParseError };
enum class Outcome { Success, MaxStepsExceeded, Aborted };

std::string_view step_kind_name(StepKind kind);
StepKind step_kind_from_name(std::string_view name);
std::string_view outcome_name(Outcome outcome);

struct AgentStep {
  std::size_t ordinal = 0;
  StepKind kind = StepKind::Thought;
  json payload;
};

struct Transcript {
  json config;
  std::vector<AgentStep> steps;
  json exchanges = json::array();  // every completion request/response, in call order
  Outcome outcome = Outcome::Aborted;
  std::optional<ErrorCode> error_code;
  std::string error_message;

  std::vector<StepKind> kinds() const;
  std::size_t count(StepKind kind) const;
  // Answer payload of the final_answer step, if the run reached one.
  std::optional<std::vector<std::string>> final_answer() const;
};

// Timestamps and identity live outside the transcript body so bodies from
// replayed runs compare byte for byte.
struct Envelope {
  std::string run_id;
  std::string started_at;
  std::string finished_at;
  std::string config_hash;
  json notes = json::object();
};

json to_json(const Transcript& transcript);
Transcript transcript_from_json(const json& value);
json to_json(const Envelope& envelope);

std::string utc_timestamp();

// Figure-style "thought process" rendering of a transcript.
std::string render_thoughts(const Transcript& transcript);

struct Limits {
  std::size_t max_steps = 8;
  std::size_t max_parse_retries = 2;
};

struct RunRequest {
  std::string system_prompt;
  std::string task_prompt;
  Limits limits;
  llm::CompletionParams params;
  json config = json::object();
};

struct AgentRun {
  std::optional<std::vector<std::string>> answer;
  Transcript transcript;

  bool ok() const { return transcript.outcome == Outcome::Success; }
};

// complete -> parse_step -> invoke -> observe, until final_answer or
// limits.max_steps tool invocations. Parse failures are fed back to the model
// up to limits.max_parse_retries times. Never throws for loop-level failures:
// the outcome and error code are recorded in the returned transcript.
AgentRun run(const RunRequest& request, const ToolRegistry& tools, llm::ChatClient& client);

// System prompt: tool list, the Thought/Action format, and the
// self-evaluation checklist used to decide when to query again.
std::string default_system_prompt(const ToolRegistry& tools);

struct RetrieverOptions {
  std::size_t k = 15;
  std::size_t max_chunk_chars = 500;
};

// Embeds {query}, runs exact top-k search and lists the hits not already shown
// earlier in the same run. Each call to retriever_tool() starts a fresh
// seen-set, so build one per run. Failures become observation text.
Tool retriever_tool(KnowledgeBase kb, std::shared_ptr<const embedding::Embedder> embedder,
                    RetrieverOptions options = {});

}  // namespace agrag::agent
