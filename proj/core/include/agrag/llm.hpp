#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrag/http.hpp"
#include "agrag/util.hpp"

namespace agrag::llm {

enum class Role { System, User, Assistant, Tool };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionParams {
  std::string model_name = "gpt-4o";
  double temperature = 0.2;
  std::size_t max_output_chars = 20000;
  std::optional<std::int64_t> seed;
};

json to_json(const ChatMessage& message);
json to_json(std::span<const ChatMessage> messages);
json to_json(const CompletionParams& params);
CompletionParams completion_params_from_json(const json& value, CompletionParams defaults = {});

// Chat-completion backend. complete() validates inputs and outputs around the
// backend-specific fetch; it is not thread-safe per instance.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Throws InvalidArgument, EmptyResponse, ResponseTooLong, or whatever the
  // backend raises (BackendUnavailable, ScriptExhausted).
  std::string complete(std::span<const ChatMessage> messages, const CompletionParams& params);

  std::size_t calls() const noexcept { return calls_; }

 protected:
  virtual std::string fetch(std::span<const ChatMessage> messages, const CompletionParams& params) = 0;

 private:
  std::size_t calls_ = 0;
};

// Ordered responses shared by any number of clients; each complete() pops the next.
class Script {
 public:
  explicit Script(std::vector<std::string> responses);

  // Accepts ["r1", ...] or {"responses": ["r1", ...]}.
  static std::shared_ptr<Script> from_json(const json& value);
  static std::shared_ptr<Script> load(const std::filesystem::path& path);

  std::string next();  // throws ScriptExhausted
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> responses_;
  std::size_t served_ = 0;
};

class ScriptedChatClient final : public ChatClient {
 public:
  explicit ScriptedChatClient(std::shared_ptr<Script> script) : script_(std::move(script)) {}
  explicit ScriptedChatClient(std::vector<std::string> responses)
      : script_(std::make_shared<Script>(std::move(responses))) {}

 protected:
  std::string fetch(std::span<const ChatMessage> messages, const CompletionParams& params) override;

 private:
  std::shared_ptr<Script> script_;
};

struct HttpChatConfig {
  std::string base_url = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  http::RetryPolicy retry;
  std::chrono::milliseconds timeout{120000};
};

// POST {model, messages:[{role, content}], temperature[, seed]} ->
// {choices:[{message:{content}}]}.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);

  static json request_body(std::span<const ChatMessage> messages, const CompletionParams& params);

 protected:
  std::string fetch(std::span<const ChatMessage> messages, const CompletionParams& params) override;

 private:
  HttpChatConfig config_;
};

}  // namespace agrag::llm
