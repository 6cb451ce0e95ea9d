#include <gtest/gtest.h>

#include <cstdlib>

#include "agrag/error.hpp"
#include "agrag/llm.hpp"
#include "test_support.hpp"

using namespace agrag;
using namespace agrag::llm;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no agrag::Error thrown";
  return ErrorCode::InvalidArgument;
}

const std::vector<ChatMessage> kTwo = {{Role::System, "be brief"}, {Role::User, "hello"}};

HttpChatConfig local(const agrag::testing::CaptureServer& server) {
  HttpChatConfig c;
  c.base_url = server.url("/v1/chat/completions");
  c.api_key_env = "AGRAG_TEST_CHAT_KEY";
  c.retry.base_delay = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(5000);
  return c;
}

void reply(httplib::Response& res, const std::string& content) {
  res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                  "application/json");
}

}  // namespace

TEST(Script, QueueContract) {
  ScriptedChatClient client(std::vector<std::string>{"r1", "r2"});
  EXPECT_EQ(client.complete(kTwo, {}), "r1");
  EXPECT_EQ(client.complete(kTwo, {}), "r2");
  EXPECT_EQ(code_of([&] { client.complete(kTwo, {}); }), ErrorCode::ScriptExhausted);
  EXPECT_EQ(client.calls(), 3u);
}

TEST(Script, AcceptsBothJsonShapes) {
  EXPECT_EQ(Script::from_json(json::array({"a", "b"}))->remaining(), 2u);
  EXPECT_EQ(Script::from_json(json{{"responses", {"a"}}})->next(), "a");
  EXPECT_THROW(Script::from_json(json{{"other", 1}}), Error);
  EXPECT_EQ(code_of([] { Script::load(agrag::testing::fixture("scripts/missing.json")); }), ErrorCode::Io);
  EXPECT_EQ(Script::load(agrag::testing::fixture("scripts/single_run.json"))->remaining(), 2u);
}

TEST(Script, SharedAcrossClientsInOrder) {
  auto script = std::make_shared<Script>(std::vector<std::string>{"1", "2", "3"});
  ScriptedChatClient a(script), b(script);
  EXPECT_EQ(a.complete(kTwo, {}), "1");
  EXPECT_EQ(b.complete(kTwo, {}), "2");
  EXPECT_EQ(a.complete(kTwo, {}), "3");
}

TEST(ChatClient, ValidatesInputsAndOutputs) {
  ScriptedChatClient client(std::vector<std::string>{"", std::string(50, 'x'), "ok"});
  EXPECT_EQ(code_of([&] { client.complete({}, {}); }), ErrorCode::InvalidArgument);
  const std::vector<ChatMessage> blank = {{Role::User, ""}};
  EXPECT_EQ(code_of([&] { client.complete(blank, {}); }), ErrorCode::InvalidArgument);
  CompletionParams hot;
  hot.temperature = 2.5;
  EXPECT_EQ(code_of([&] { client.complete(kTwo, hot); }), ErrorCode::InvalidArgument);

  EXPECT_EQ(code_of([&] { client.complete(kTwo, {}); }), ErrorCode::EmptyResponse);
  CompletionParams tight;
  tight.max_output_chars = 10;
  EXPECT_EQ(code_of([&] { client.complete(kTwo, tight); }), ErrorCode::ResponseTooLong);
  EXPECT_EQ(client.complete(kTwo, tight), "ok");
}

TEST(HttpChat, RequestBodyCarriesModelMessagesTemperature) {
  ::setenv("AGRAG_TEST_CHAT_KEY", "sk-test-123", 1);
  agrag::testing::CaptureServer server([](const httplib::Request&, httplib::Response& res) { reply(res, "hi there"); });
  HttpChatClient client(local(server));
  CompletionParams p;
  p.model_name = "gpt-4o";
  p.temperature = 0.2;
  p.seed = 42;
  EXPECT_EQ(client.complete(kTwo, p), "hi there");

  const auto bodies = server.bodies();
  ASSERT_EQ(bodies.size(), 1u);
  const auto body = json::parse(bodies[0]);
  EXPECT_EQ(body.at("model"), "gpt-4o");
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.2);
  EXPECT_EQ(body.at("seed"), 42);
  const json want = json::array({{{"role", "system"}, {"content", "be brief"}}, {{"role", "user"}, {"content", "hello"}}});
  EXPECT_EQ(body.at("messages"), want);
  EXPECT_EQ(server.auth_headers()[0], "Bearer sk-test-123");
  EXPECT_EQ(HttpChatClient::request_body(kTwo, p), body);
}

TEST(HttpChat, ServerErrorsRetryThenFail) {
  agrag::testing::CaptureServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  HttpChatClient client(local(server));
  EXPECT_EQ(code_of([&] { client.complete(kTwo, {}); }), ErrorCode::BackendUnavailable);
  EXPECT_EQ(server.bodies().size(), 3u);
}

TEST(HttpChat, TransientThenSuccess) {
  std::atomic<int> n{0};
  agrag::testing::CaptureServer server([&](const httplib::Request&, httplib::Response& res) {
    if (n++ == 0) {
      res.status = 429;
      return;
    }
    reply(res, "second time");
  });
  HttpChatClient client(local(server));
  EXPECT_EQ(client.complete(kTwo, {}), "second time");
  EXPECT_EQ(server.bodies().size(), 2u);
}

TEST(HttpChat, ClientErrorsAreNotRetried) {
  agrag::testing::CaptureServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("bad key", "text/plain");
  });
  HttpChatClient client(local(server));
  EXPECT_EQ(code_of([&] { client.complete(kTwo, {}); }), ErrorCode::BackendUnavailable);
  EXPECT_EQ(server.bodies().size(), 1u);
}

TEST(HttpChat, TransportFailureIsBackendUnavailable) {
  HttpChatConfig c;
  c.base_url = "http://127.0.0.1:1/v1/chat/completions";
  c.retry.base_delay = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(500);
  HttpChatClient client(c);
  EXPECT_EQ(code_of([&] { client.complete(kTwo, {}); }), ErrorCode::BackendUnavailable);
}

TEST(CompletionParams, JsonRoundTrip) {
  CompletionParams p;
  p.model_name = "m";
  p.temperature = 0.7;
  p.max_output_chars = 99;
  p.seed = -3;
  const auto back = completion_params_from_json(to_json(p));
  EXPECT_EQ(back.model_name, "m");
  EXPECT_EQ(back.temperature, 0.7);
  EXPECT_EQ(back.max_output_chars, 99u);
  EXPECT_EQ(back.seed, -3);
  EXPECT_EQ(role_from_name(role_name(Role::Tool)), Role::Tool);
}
