#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace genet {

/// Five-section instruction template. Unset sections fall back to the
/// stage's built-in defaults, so callers can override one section at a time.
/// The token {{SCHEMA}} is replaced with the canonical topology schema
/// description wherever it appears.
struct PromptTemplate {
  std::optional<std::string> role;           // section 1
  std::optional<std::string> task;           // section 2
  std::optional<std::string> extras;         // section 3
  std::optional<std::string> constraints;    // section 4
  std::optional<std::string> output_format;  // section 5

  /// Text asset format: five section bodies separated by lines containing
  /// exactly `---`. An empty body keeps the stage default for that section.
  static PromptTemplate from_file(const std::filesystem::path& path);
  static PromptTemplate from_text(const std::string& text);
};

/// Human-readable description of the topology representation JSON schema;
/// substituted for {{SCHEMA}} in templates.
const std::string& schema_description();

/// Default section texts for the image-analysis stage.
std::array<std::string, 5> default_understanding_sections();

/// Default section texts for the intent-fulfilment stage.
std::array<std::string, 5> default_implementation_sections();

/// Joins the template over the given defaults and substitutes {{SCHEMA}}.
std::string render_instructions(const PromptTemplate& tmpl,
                                const std::array<std::string, 5>& defaults);

}  // namespace genet
