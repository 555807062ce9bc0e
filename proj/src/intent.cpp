#include "genet/intent.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <string_view>

#include "genet/understand.hpp"

namespace genet {

llm::ChatRequest build_implementation_prompt(const Intent& intent,
                                             const SpecificationBundle& spec,
                                             const PromptTemplate& tmpl) {
  if (intent.text.empty()) {
    raise(Errc::InvalidRequest, "intent text is empty");
  }
  llm::ChatRequest request;
  request.system_instructions =
      render_instructions(tmpl, default_implementation_sections());
  request.user_parts.emplace_back(intent.text);
  request.attachments.push_back(
      {"topology.json", emit_representation(spec.topology)});
  request.attachments.push_back(
      {"configs.txt", emit_config_bundle(spec.configs)});
  return request;
}

namespace {

constexpr std::string_view kTopologySentinel = "=== TOPOLOGY ===";
constexpr std::string_view kConfigsSentinel = "=== CONFIGS ===";
constexpr std::string_view kExplanationSentinel = "=== EXPLANATION ===";

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Removes one surrounding ``` fence, if present, so fenced section bodies
// parse the same as bare ones.
std::string strip_fence(const std::string& body) {
  std::string_view v = trim_view(body);
  if (v.substr(0, 3) != "```") return std::string(v);
  size_t first_newline = v.find('\n');
  if (first_newline == std::string_view::npos) return std::string(v);
  size_t closing = v.rfind("```");
  if (closing <= first_newline) return std::string(v);
  return std::string(v.substr(first_newline + 1, closing - first_newline - 1));
}

}  // namespace

SolutionEnvelope parse_solution_envelope(
    const std::string& model_text,
    const TopologyRepresentation& fallback_topology) {
  std::map<std::string_view, std::string> sections;

  std::string_view active;
  size_t pos = 0;
  while (pos <= model_text.size()) {
    size_t eol = model_text.find('\n', pos);
    size_t line_end = (eol == std::string::npos) ? model_text.size() : eol;
    std::string_view line =
        strip_cr(std::string_view(model_text).substr(pos, line_end - pos));
    std::string_view trimmed = trim_view(line);

    std::string_view sentinel;
    if (trimmed == kTopologySentinel) sentinel = kTopologySentinel;
    else if (trimmed == kConfigsSentinel) sentinel = kConfigsSentinel;
    else if (trimmed == kExplanationSentinel) sentinel = kExplanationSentinel;

    if (!sentinel.empty()) {
      if (sections.count(sentinel)) {
        raise(Errc::DuplicateSection,
              "section sentinel appears twice: " + std::string(sentinel));
      }
      sections[sentinel] = {};
      active = sentinel;
    } else if (!active.empty()) {
      sections[active].append(model_text, pos,
                              std::min(model_text.size(), line_end + 1) - pos);
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }

  auto configs_it = sections.find(kConfigsSentinel);
  if (configs_it == sections.end()) {
    raise(Errc::MissingConfigSection, "model output has no CONFIGS section");
  }

  SolutionEnvelope envelope;
  envelope.raw_response = model_text;

  try {
    envelope.updated.configs = parse_config_bundle(strip_fence(configs_it->second));
  } catch (const Error& e) {
    raise(Errc::MalformedSolution,
          std::string("CONFIGS section: ") + e.what());
  }

  if (auto it = sections.find(kTopologySentinel); it != sections.end()) {
    try {
      envelope.updated.topology = extract_representation(it->second);
    } catch (const Error& e) {
      raise(Errc::MalformedSolution,
            std::string("TOPOLOGY section: ") + e.what());
    }
  } else {
    envelope.updated.topology = fallback_topology;
  }

  if (auto it = sections.find(kExplanationSentinel); it != sections.end()) {
    envelope.explanation = std::string(trim_view(it->second));
  }
  return envelope;
}

SolutionEnvelope implement_intent(llm::ChatProvider& provider,
                                  const Intent& intent,
                                  const SpecificationBundle& spec,
                                  double temperature,
                                  const PromptTemplate& tmpl,
                                  std::optional<llm::ReplayKey> replay,
                                  const std::string& model_id) {
  llm::ChatRequest request = build_implementation_prompt(intent, spec, tmpl);
  request.temperature = temperature;
  request.model_id = model_id;
  request.replay = std::move(replay);

  llm::ChatResponse response = provider.complete(request);
  if (response.finish_reason == llm::FinishReason::Refused) {
    raise(Errc::ModelRefused, "model refused the intent request");
  }
  return parse_solution_envelope(response.text, spec.topology);
}

}  // namespace genet
