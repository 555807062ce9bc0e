#include "genet/understand.hpp"

#include <json.hpp>

namespace genet {

std::string detect_image_media_type(std::string_view image_bytes) {
  static constexpr std::string_view png_magic = "\x89PNG\r\n\x1a\n";
  static constexpr std::string_view jpeg_magic = "\xFF\xD8\xFF";
  if (image_bytes.substr(0, png_magic.size()) == png_magic) {
    return "image/png";
  }
  if (image_bytes.substr(0, jpeg_magic.size()) == jpeg_magic) {
    return "image/jpeg";
  }
  raise(Errc::UnsupportedImageFormat, "image is neither PNG nor JPEG");
}

llm::ChatRequest build_understanding_prompt(const std::string& image_bytes,
                                            const PromptTemplate& tmpl) {
  llm::ImagePart image;
  image.media_type = detect_image_media_type(image_bytes);
  image.bytes = image_bytes;

  llm::ChatRequest request;
  request.system_instructions =
      render_instructions(tmpl, default_understanding_sections());
  request.user_parts.emplace_back(std::move(image));
  return request;
}

namespace {

// Bodies of ``` fenced blocks, in order of appearance. Language tags after
// the opening fence are ignored.
std::vector<std::string> fenced_blocks(const std::string& text) {
  std::vector<std::string> blocks;
  size_t pos = 0;
  while (true) {
    size_t open = text.find("```", pos);
    if (open == std::string::npos) break;
    size_t body_start = text.find('\n', open);
    if (body_start == std::string::npos) break;
    ++body_start;
    size_t close = text.find("```", body_start);
    if (close == std::string::npos) break;
    blocks.push_back(text.substr(body_start, close - body_start));
    pos = text.find('\n', close);
    if (pos == std::string::npos) break;
  }
  return blocks;
}

std::optional<TopologyRepresentation> try_parse(const std::string& candidate) {
  nlohmann::json probe = nlohmann::json::parse(candidate, nullptr, false);
  if (probe.is_discarded() || !probe.is_object() || !probe.contains("nodes")) {
    return std::nullopt;
  }
  try {
    return parse_representation(candidate);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

TopologyRepresentation extract_representation(const std::string& model_text) {
  for (const auto& block : fenced_blocks(model_text)) {
    if (auto rep = try_parse(block)) return *std::move(rep);
  }
  if (auto rep = try_parse(model_text)) return *std::move(rep);
  raise(Errc::UnparseableModelOutput,
        "no parseable topology document in model output");
}

UnderstandResult understand_topology(llm::ChatProvider& provider,
                                     const std::string& image_bytes,
                                     double temperature,
                                     const PromptTemplate& tmpl,
                                     std::optional<llm::ReplayKey> replay,
                                     const std::string& model_id) {
  llm::ChatRequest request = build_understanding_prompt(image_bytes, tmpl);
  request.temperature = temperature;
  request.model_id = model_id;
  request.replay = std::move(replay);

  llm::ChatResponse response = provider.complete(request);
  if (response.finish_reason == llm::FinishReason::Refused) {
    raise(Errc::ModelRefused, "model refused the analysis request");
  }
  UnderstandResult result;
  result.raw_response = response.text;
  result.representation = extract_representation(response.text);
  return result;
}

}  // namespace genet
