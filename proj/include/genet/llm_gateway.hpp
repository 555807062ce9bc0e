#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "genet/errors.hpp"

namespace genet::llm {

enum class Stage { Understand, Implement };

const char* to_string(Stage stage) noexcept;

/// Shortest decimal form: 0 -> "0", 0.1 -> "0.1", 1 -> "1".
std::string format_temperature(double temperature);

/// Coordinates of one canned transcript in a replay directory.
struct ReplayKey {
  Stage stage = Stage::Understand;
  std::string scenario_id;
  double temperature = 0.0;
  int repetition = 1;

  /// <stage>/<scenario_id>/t<temperature>/r<repetition>.txt
  std::filesystem::path relative_path() const;
};

struct ImagePart {
  std::string bytes;
  std::string media_type;  // "image/png" or "image/jpeg"
};

struct Attachment {
  std::string name;
  std::string content;
};

struct ChatRequest {
  std::string system_instructions;
  std::vector<std::variant<std::string, ImagePart>> user_parts;
  double temperature = 0.0;
  std::string model_id;
  std::vector<Attachment> attachments;
  std::optional<ReplayKey> replay;
};

enum class FinishReason { Complete, Truncated, Refused };

struct TokenUsage {
  long prompt = 0;
  long completion = 0;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Complete;
  TokenUsage usage;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct ProviderConfig {
  std::string provider;  // "live" or "replay"
  std::string endpoint;
  std::string model_id;
  std::string transcripts_dir;
  int max_inflight = 4;
  int max_retries = 3;
};

ProviderConfig parse_provider_config(const std::string& json_text);
ProviderConfig load_provider_config(const std::filesystem::path& path);

/// Builds a provider from config. Live providers read GENET_API_KEY and
/// throw AuthError before any network activity when it is unset.
std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

/// Deterministic provider that serves transcripts from a directory tree,
/// keyed by the request's ReplayKey. Read-only and thread-safe.
class ReplayProvider final : public ChatProvider {
 public:
  explicit ReplayProvider(std::filesystem::path transcripts_dir);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::filesystem::path dir_;
};

/// HTTP provider speaking a chat-completions JSON dialect with image parts.
/// Attachments are inlined into the user message as named file blocks.
class LiveProvider final : public ChatProvider {
 public:
  LiveProvider(ProviderConfig config, std::string api_key);
  ~LiveProvider() override;

  static std::unique_ptr<LiveProvider> from_env(ProviderConfig config);

  ChatResponse complete(const ChatRequest& request) override;

  /// Request JSON body, exposed for tests.
  static std::string render_body(const ChatRequest& request,
                                 const std::string& default_model);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Throws InvalidRequest when a request violates its invariants.
void validate_request(const ChatRequest& request);

}  // namespace genet::llm
