#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "genet/llm_gateway.hpp"
#include "support/temp_dir.hpp"

using namespace genet;
using namespace genet::llm;
using genet::testing::TempDir;
using nlohmann::json;

namespace {

ChatRequest text_request(const std::string& text) {
  ChatRequest request;
  request.system_instructions = "be helpful";
  request.user_parts.emplace_back(text);
  return request;
}

}  // namespace

TEST_CASE("temperature formatting matches path conventions") {
  CHECK(format_temperature(0.0) == "0");
  CHECK(format_temperature(0.1) == "0.1");
  CHECK(format_temperature(0.5) == "0.5");
  CHECK(format_temperature(1.0) == "1");

  ReplayKey key{Stage::Understand, "s01", 0.1, 3};
  CHECK(key.relative_path() == std::filesystem::path("understand/s01/t0.1/r3.txt"));
  ReplayKey impl{Stage::Implement, "s02", 0.0, 1};
  CHECK(impl.relative_path() == std::filesystem::path("implement/s02/t0/r1.txt"));
}

TEST_CASE("request invariants are enforced") {
  ChatRequest no_parts;
  no_parts.temperature = 0.5;
  CHECK_THROWS_AS(validate_request(no_parts), Error);

  ChatRequest hot = text_request("hi");
  hot.temperature = 2.5;
  try {
    validate_request(hot);
    FAIL("expected InvalidRequest");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidRequest);
  }
}

TEST_CASE("replay provider returns stored transcripts byte-identically") {
  TempDir dir("replay");
  const std::string transcript = "The diagram shows three routers.\nDone.";
  dir.write("understand/s01/t0/r1.txt", transcript);

  ReplayProvider provider(dir.path());
  ChatRequest request = text_request("describe");
  request.replay = ReplayKey{Stage::Understand, "s01", 0.0, 1};

  CHECK(provider.complete(request).text == transcript);
  // A second provider over the same directory sees the same bytes.
  ReplayProvider again(dir.path());
  CHECK(again.complete(request).text == transcript);
  CHECK(provider.complete(request).text == again.complete(request).text);
}

TEST_CASE("replay provider reports missing transcripts") {
  TempDir dir("replay-missing");
  ReplayProvider provider(dir.path());
  ChatRequest request = text_request("describe");
  request.replay = ReplayKey{Stage::Understand, "nope", 0.9, 4};
  try {
    provider.complete(request);
    FAIL("expected MissingTranscript");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingTranscript);
  }

  ChatRequest keyless = text_request("describe");
  CHECK_THROWS_AS(provider.complete(keyless), Error);
}

TEST_CASE("replay calls are safe to interleave across threads") {
  TempDir dir("replay-threads");
  dir.write("understand/a/t0/r1.txt", "alpha");
  dir.write("understand/b/t0/r1.txt", "beta");

  ReplayProvider provider(dir.path());
  std::atomic<int> failures{0};
  auto hammer = [&](const std::string& scenario, const std::string& expected) {
    for (int i = 0; i < 50; ++i) {
      ChatRequest request = text_request("x");
      request.replay = ReplayKey{Stage::Understand, scenario, 0.0, 1};
      if (provider.complete(request).text != expected) ++failures;
    }
  };
  std::thread t1(hammer, "a", "alpha");
  std::thread t2(hammer, "b", "beta");
  t1.join();
  t2.join();
  CHECK(failures == 0);
}

TEST_CASE("provider config parsing") {
  ProviderConfig config = parse_provider_config(
      R"({"provider": "replay", "transcripts_dir": "/tmp/x", "max_retries": 1})");
  CHECK(config.provider == "replay");
  CHECK(config.transcripts_dir == "/tmp/x");
  CHECK(config.max_retries == 1);
  CHECK(config.max_inflight == 4);

  CHECK_THROWS_AS(parse_provider_config("not json"), Error);
  CHECK_THROWS_AS(parse_provider_config(R"({"provider": "dream"})"), Error);
  CHECK_THROWS_AS(parse_provider_config(R"({"provider": "replay"})"), Error);
  CHECK_THROWS_AS(parse_provider_config(R"({"provider": "live"})"), Error);
}

TEST_CASE("live provider requires a credential before any network call") {
  ::unsetenv("GENET_API_KEY");
  ProviderConfig config;
  config.provider = "live";
  config.endpoint = "http://127.0.0.1:1/v1/chat/completions";  // never reached
  try {
    make_provider(config);
    FAIL("expected AuthError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AuthError);
  }
}

TEST_CASE("live request body carries system, image, and attachment parts") {
  ChatRequest request;
  request.system_instructions = "analyze";
  request.temperature = 0.5;
  request.user_parts.emplace_back(ImagePart{std::string("\x89PNG\r\n\x1a\nxx", 10),
                                            "image/png"});
  request.user_parts.emplace_back(std::string("and this text"));
  request.attachments.push_back({"configs.txt", "hostname R1\n"});

  json body = json::parse(LiveProvider::render_body(request, "test-model"));
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0.5);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "analyze");
  const json& content = body["messages"][1]["content"];
  REQUIRE(content.size() == 3);
  CHECK(content[0]["type"] == "image_url");
  std::string url = content[0]["image_url"]["url"];
  CHECK(url.rfind("data:image/png;base64,", 0) == 0);
  CHECK(content[1]["text"] == "and this text");
  CHECK(std::string(content[2]["text"]).find("configs.txt") != std::string::npos);
}

TEST_CASE("live provider round-trips against a local endpoint with retries") {
  httplib::Server server;
  std::atomic<int> calls{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                int call = ++calls;
                CHECK(req.get_header_value("Authorization") == "Bearer k-test");
                if (call == 1) {
                  res.status = 500;
                  res.set_content("boom", "text/plain");
                  return;
                }
                json reply{
                    {"choices",
                     json::array(
                         {json{{"message", {{"role", "assistant"},
                                            {"content", "pong"}}},
                               {"finish_reason", "stop"}}})},
                    {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
                res.set_content(reply.dump(), "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig config;
  config.provider = "live";
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) +
                    "/v1/chat/completions";
  config.model_id = "test-model";
  config.max_retries = 2;
  LiveProvider provider(config, "k-test");

  ChatResponse response = provider.complete(text_request("ping"));
  CHECK(response.text == "pong");
  CHECK(response.finish_reason == FinishReason::Complete);
  CHECK(response.usage.prompt == 12);
  CHECK(response.usage.completion == 3);
  CHECK(calls == 2);  // one failure, one success

  server.stop();
  server_thread.join();
}

TEST_CASE("live provider surfaces RateLimited after bounded retries") {
  httplib::Server server;
  std::atomic<int> calls{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                ++calls;
                res.status = 429;
                res.set_content("slow down", "text/plain");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig config;
  config.provider = "live";
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) +
                    "/v1/chat/completions";
  config.max_retries = 1;
  LiveProvider provider(config, "k-test");

  try {
    provider.complete(text_request("ping"));
    FAIL("expected RateLimited");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RateLimited);
  }
  CHECK(calls == 2);  // initial attempt plus one retry

  server.stop();
  server_thread.join();
}
