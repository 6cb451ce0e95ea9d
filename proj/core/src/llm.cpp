#include "agrag/llm.hpp"

#include <algorithm>
#include <cstdlib>

#include "agrag/error.hpp"

namespace agrag::llm {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  if (name == "tool") return Role::Tool;
  throw Error(ErrorCode::InvalidArgument, "unknown role '" + std::string(name) + "'");
}

json to_json(const ChatMessage& m) { return json{{"role", role_name(m.role)}, {"content", m.content}}; }

json to_json(std::span<const ChatMessage> messages) {
  json out = json::array();
  for (const auto& m : messages) out.push_back(to_json(m));
  return out;
}

json to_json(const CompletionParams& p) {
  json out{{"model_name", p.model_name}, {"temperature", p.temperature}, {"max_output_chars", p.max_output_chars}};
  out["seed"] = p.seed ? json(*p.seed) : json(nullptr);
  return out;
}

CompletionParams completion_params_from_json(const json& v, CompletionParams p) {
  if (v.contains("model_name")) p.model_name = v.at("model_name").get<std::string>();
  if (v.contains("temperature")) p.temperature = v.at("temperature").get<double>();
  if (v.contains("max_output_chars")) p.max_output_chars = v.at("max_output_chars").get<std::size_t>();
  if (v.contains("seed")) {
    p.seed = v.at("seed").is_null() ? std::nullopt : std::optional<std::int64_t>(v.at("seed").get<std::int64_t>());
  }
  if (p.temperature < 0.0 || p.temperature > 2.0) throw Error(ErrorCode::Config, "temperature must lie in [0, 2]");
  if (p.max_output_chars == 0) throw Error(ErrorCode::Config, "max_output_chars must be positive");
  return p;
}

std::string ChatClient::complete(std::span<const ChatMessage> messages, const CompletionParams& params) {
  if (messages.empty()) throw Error(ErrorCode::InvalidArgument, "no messages");
  for (const auto& m : messages) {
    if ((m.role == Role::User || m.role == Role::System) && m.content.empty()) {
      throw Error(ErrorCode::InvalidArgument, std::string(role_name(m.role)) + " message is empty");
    }
  }
  if (params.temperature < 0.0 || params.temperature > 2.0) {
    throw Error(ErrorCode::InvalidArgument, "temperature must lie in [0, 2]");
  }
  ++calls_;
  std::string text = fetch(messages, params);
  if (trim(text).empty()) throw Error(ErrorCode::EmptyResponse, "model returned no text");
  if (utf8::length(text) > params.max_output_chars) {
    throw Error(ErrorCode::ResponseTooLong, std::to_string(utf8::length(text)) + " chars exceeds limit " +
                                                std::to_string(params.max_output_chars));
  }
  return text;
}

Script::Script(std::vector<std::string> responses) : responses_(responses.begin(), responses.end()) {}

std::shared_ptr<Script> Script::from_json(const json& value) {
  if (value.is_object() && !value.contains("responses")) throw Error(ErrorCode::Config, "script object needs \"responses\"");
  const json& list = value.is_object() ? value.at("responses") : value;
  if (!list.is_array() || !std::all_of(list.begin(), list.end(), [](const json& r) { return r.is_string(); })) {
    throw Error(ErrorCode::Config, "script must be an array of strings");
  }
  return std::make_shared<Script>(list.get<std::vector<std::string>>());
}

std::shared_ptr<Script> Script::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

std::string Script::next() {
  std::lock_guard lock(mutex_);
  if (responses_.empty()) {
    throw Error(ErrorCode::ScriptExhausted, "script exhausted after " + std::to_string(served_) + " responses");
  }
  std::string out = std::move(responses_.front());
  responses_.pop_front();
  ++served_;
  return out;
}

std::size_t Script::remaining() const {
  std::lock_guard lock(mutex_);
  return responses_.size();
}

std::string ScriptedChatClient::fetch(std::span<const ChatMessage>, const CompletionParams&) {
  return script_->next();
}

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  http::split_url(config_.base_url);
}

json HttpChatClient::request_body(std::span<const ChatMessage> messages, const CompletionParams& params) {
  json body{{"model", params.model_name}, {"messages", to_json(messages)}, {"temperature", params.temperature}};
  if (params.seed) body["seed"] = *params.seed;
  return body;
}

std::string HttpChatClient::fetch(std::span<const ChatMessage> messages, const CompletionParams& params) {
  http::Request request;
  request.url = config_.base_url;
  request.timeout = config_.timeout;
  request.body = request_body(messages, params).dump();
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    request.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  const auto response = http::with_retries(config_.retry, "chat completion", [&] {
    auto r = http::post_json(request);
    http::check_status(r, "chat completion");
    return r;
  });

  try {
    const json parsed = json::parse(response.body);
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("unexpected chat completion response: ") + e.what());
  }
}

}  // namespace agrag::llm
