#pragma once

#include <optional>
#include <string>

#include "genet/llm_gateway.hpp"
#include "genet/prompts.hpp"
#include "genet/topo_model.hpp"

namespace genet {

struct Intent {
  enum class TypeHint { None, Topology, Configuration };

  std::string text;
  TypeHint hint = TypeHint::None;
};

struct SolutionEnvelope {
  SpecificationBundle updated;
  std::string explanation;
  std::string raw_response;
};

/// Builds the expert request: five instruction sections, the intent as the
/// user part, and the emitted topology + config bundle as attachments.
llm::ChatRequest build_implementation_prompt(const Intent& intent,
                                             const SpecificationBundle& spec,
                                             const PromptTemplate& tmpl = {});

/// Splits model output at the `=== TOPOLOGY ===` / `=== CONFIGS ===` /
/// `=== EXPLANATION ===` sentinel lines (any order, each at most once).
/// A missing TOPOLOGY section means "no topology change" and the fallback
/// is used; CONFIGS is mandatory.
SolutionEnvelope parse_solution_envelope(
    const std::string& model_text, const TopologyRepresentation& fallback_topology);

SolutionEnvelope implement_intent(
    llm::ChatProvider& provider, const Intent& intent,
    const SpecificationBundle& spec, double temperature,
    const PromptTemplate& tmpl = {},
    std::optional<llm::ReplayKey> replay = std::nullopt,
    const std::string& model_id = {});

}  // namespace genet
