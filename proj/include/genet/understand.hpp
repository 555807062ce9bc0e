#pragma once

#include <optional>
#include <string>

#include "genet/llm_gateway.hpp"
#include "genet/prompts.hpp"
#include "genet/topo_model.hpp"

namespace genet {

/// Sniffs PNG/JPEG magic bytes; throws UnsupportedImageFormat otherwise.
std::string detect_image_media_type(std::string_view image_bytes);

/// Assembles the analyst request: five instruction sections in order and the
/// image as the single user part.
llm::ChatRequest build_understanding_prompt(const std::string& image_bytes,
                                            const PromptTemplate& tmpl = {});

/// Pulls a topology document out of model output: first parseable fenced code
/// block with a `nodes` key wins, then a whole-text parse as fallback.
TopologyRepresentation extract_representation(const std::string& model_text);

struct UnderstandResult {
  TopologyRepresentation representation;
  std::string raw_response;
};

UnderstandResult understand_topology(
    llm::ChatProvider& provider, const std::string& image_bytes,
    double temperature, const PromptTemplate& tmpl = {},
    std::optional<llm::ReplayKey> replay = std::nullopt,
    const std::string& model_id = {});

}  // namespace genet
