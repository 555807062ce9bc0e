#include "genet/llm_gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "genet/io_util.hpp"

namespace genet::llm {

using nlohmann::json;

const char* to_string(Stage stage) noexcept {
  return stage == Stage::Understand ? "understand" : "implement";
}

std::string format_temperature(double temperature) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", temperature);
  return buf;
}

std::filesystem::path ReplayKey::relative_path() const {
  return std::filesystem::path(to_string(stage)) / scenario_id /
         ("t" + format_temperature(temperature)) /
         ("r" + std::to_string(repetition) + ".txt");
}

void validate_request(const ChatRequest& request) {
  if (request.temperature < 0.0 || request.temperature > 2.0) {
    raise(Errc::InvalidRequest,
          "temperature " + format_temperature(request.temperature) +
              " outside [0, 2]");
  }
  if (request.user_parts.empty()) {
    raise(Errc::InvalidRequest, "request has no user parts");
  }
}

ProviderConfig parse_provider_config(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::InvalidConfig, "provider config is not a JSON object");
  }
  ProviderConfig config;
  config.provider = doc.value("provider", "");
  if (config.provider != "live" && config.provider != "replay") {
    raise(Errc::InvalidConfig,
          "provider must be \"live\" or \"replay\", got \"" + config.provider +
              "\"");
  }
  config.endpoint = doc.value("endpoint", "");
  config.model_id = doc.value("model_id", "");
  config.transcripts_dir = doc.value("transcripts_dir", "");
  config.max_inflight = doc.value("max_inflight", 4);
  config.max_retries = doc.value("max_retries", 3);
  if (config.max_inflight < 1) {
    raise(Errc::InvalidConfig, "max_inflight must be >= 1");
  }
  if (config.max_retries < 0) {
    raise(Errc::InvalidConfig, "max_retries must be >= 0");
  }
  if (config.provider == "replay" && config.transcripts_dir.empty()) {
    raise(Errc::InvalidConfig, "replay provider requires transcripts_dir");
  }
  if (config.provider == "live" && config.endpoint.empty()) {
    raise(Errc::InvalidConfig, "live provider requires endpoint");
  }
  return config;
}

ProviderConfig load_provider_config(const std::filesystem::path& path) {
  return parse_provider_config(read_file(path));
}

// ---------------------------------------------------------------------------
// Replay provider
// ---------------------------------------------------------------------------

ReplayProvider::ReplayProvider(std::filesystem::path transcripts_dir)
    : dir_(std::move(transcripts_dir)) {}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
  validate_request(request);
  if (!request.replay) {
    raise(Errc::MissingTranscript, "request carries no replay key");
  }
  std::filesystem::path path = dir_ / request.replay->relative_path();
  if (!std::filesystem::exists(path)) {
    raise(Errc::MissingTranscript, "no transcript at '" + path.string() + "'");
  }
  ChatResponse response;
  response.text = read_file(path);
  response.finish_reason = FinishReason::Complete;
  return response;
}

// ---------------------------------------------------------------------------
// Live provider
// ---------------------------------------------------------------------------

namespace {

std::string base64_encode(std::string_view data) {
  static constexpr char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == data.size()) {
    unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

struct EndpointParts {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

EndpointParts split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    raise(Errc::InvalidConfig, "endpoint '" + endpoint + "' has no scheme");
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

FinishReason finish_reason_from(const std::string& reason) {
  if (reason == "length") return FinishReason::Truncated;
  if (reason == "content_filter" || reason == "refusal") {
    return FinishReason::Refused;
  }
  return FinishReason::Complete;
}

}  // namespace

struct LiveProvider::Impl {
  ProviderConfig config;
  std::string api_key;
  EndpointParts endpoint;
  std::counting_semaphore<1024> inflight;

  Impl(ProviderConfig cfg, std::string key)
      : config(std::move(cfg)),
        api_key(std::move(key)),
        endpoint(split_endpoint(config.endpoint)),
        inflight(config.max_inflight) {}
};

LiveProvider::LiveProvider(ProviderConfig config, std::string api_key)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(api_key))) {
  if (impl_->api_key.empty()) {
    raise(Errc::AuthError, "empty API key");
  }
}

LiveProvider::~LiveProvider() = default;

std::unique_ptr<LiveProvider> LiveProvider::from_env(ProviderConfig config) {
  const char* key = std::getenv("GENET_API_KEY");
  if (key == nullptr || *key == '\0') {
    raise(Errc::AuthError, "GENET_API_KEY is not set");
  }
  return std::make_unique<LiveProvider>(std::move(config), key);
}

std::string LiveProvider::render_body(const ChatRequest& request,
                                      const std::string& default_model) {
  json user_content = json::array();
  for (const auto& part : request.user_parts) {
    if (std::holds_alternative<std::string>(part)) {
      user_content.push_back(
          {{"type", "text"}, {"text", std::get<std::string>(part)}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      user_content.push_back(
          {{"type", "image_url"},
           {"image_url",
            {{"url", "data:" + image.media_type + ";base64," +
                         base64_encode(image.bytes)}}}});
    }
  }
  for (const auto& attachment : request.attachments) {
    user_content.push_back(
        {{"type", "text"},
         {"text", "----- file: " + attachment.name + " -----\n" +
                      attachment.content}});
  }

  json body{
      {"model", request.model_id.empty() ? default_model : request.model_id},
      {"temperature", request.temperature},
      {"messages",
       json::array({json{{"role", "system"},
                         {"content", request.system_instructions}},
                    json{{"role", "user"}, {"content", user_content}}})},
  };
  return body.dump();
}

ChatResponse LiveProvider::complete(const ChatRequest& request) {
  validate_request(request);
  std::string body = render_body(request, impl_->config.model_id);

  impl_->inflight.acquire();
  struct Release {
    Impl* impl;
    ~Release() { impl->inflight.release(); }
  } release{impl_.get()};

  httplib::Client client(impl_->endpoint.base);
  client.set_connection_timeout(30);
  client.set_read_timeout(300);
  httplib::Headers headers{{"Authorization", "Bearer " + impl_->api_key}};

  const int attempts = impl_->config.max_retries + 1;
  std::string last_error;
  bool rate_limited = false;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
    }
    auto result = client.Post(impl_->endpoint.path, headers, body,
                              "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      rate_limited = false;
      continue;
    }
    if (result->status == 401 || result->status == 403) {
      raise(Errc::AuthError, "endpoint rejected credentials (HTTP " +
                                 std::to_string(result->status) + ")");
    }
    if (result->status == 429) {
      last_error = "rate limited (HTTP 429)";
      rate_limited = true;
      continue;
    }
    if (result->status >= 500) {
      last_error = "server error (HTTP " + std::to_string(result->status) + ")";
      rate_limited = false;
      continue;
    }
    if (result->status != 200) {
      raise(Errc::TransportError, "unexpected HTTP " +
                                      std::to_string(result->status) + ": " +
                                      result->body);
    }

    json doc = json::parse(result->body, nullptr, false);
    if (doc.is_discarded()) {
      raise(Errc::TransportError, "response is not valid JSON");
    }
    ChatResponse response;
    if (doc.contains("choices") && doc["choices"].is_array() &&
        !doc["choices"].empty()) {
      const auto& choice = doc["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content") &&
          choice["message"]["content"].is_string()) {
        response.text = choice["message"]["content"].get<std::string>();
      }
      response.finish_reason =
          finish_reason_from(choice.value("finish_reason", "stop"));
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      response.usage.prompt = doc["usage"].value("prompt_tokens", 0L);
      response.usage.completion = doc["usage"].value("completion_tokens", 0L);
    }
    if (response.text.empty() &&
        response.finish_reason != FinishReason::Refused) {
      raise(Errc::TransportError, "response carries no message content");
    }
    return response;
  }
  raise(rate_limited ? Errc::RateLimited : Errc::TransportError, last_error);
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
  if (config.provider == "replay") {
    return std::make_unique<ReplayProvider>(config.transcripts_dir);
  }
  return LiveProvider::from_env(config);
}

}  // namespace genet::llm
