#include "genet/prompts.hpp"

#include <sstream>

#include "genet/io_util.hpp"

namespace genet {

const std::string& schema_description() {
  static const std::string schema = R"({
  "nodes":  [{"id": "<unique id>", "label": "<display name>",
              "kind": "router|switch|pc|server|firewall|cloud|phone|hub|other",
              "icon_hint": "<icon description, optional>",
              "group_id": "<logical group id, optional>"}],
  "links":  [{"a": "<node id>", "b": "<node id>", "label": "<optional>",
              "iface_a": "<interface at a, optional>",
              "iface_b": "<interface at b, optional>"}],
  "groups": [{"group_id": "<id>", "name": "<e.g. LAN 1>",
              "members": ["<node id>", "..."]}],
  "notes":  "<optional remarks>"
})";
  return schema;
}

std::array<std::string, 5> default_understanding_sections() {
  return {
      "You are a network topology analyst. You will receive one image of an "
      "enterprise network topology diagram.",

      "Deliver a thorough description of the components shown in the diagram "
      "(for example routers, switches, PCs, servers) and of the connections "
      "between them, including component labels, link labels, and the "
      "interfaces at which links attach.",

      "Network topology diagrams often denote logical groups of components, "
      "such as LANs. If such groups are present, highlight them and list "
      "their member components.",

      "Refrain from including any unnecessary information about the diagram; "
      "report only what is needed to reconstruct it.",

      "Answer with exactly one fenced code block containing a JSON document "
      "in this format:\n{{SCHEMA}}",
  };
}

std::array<std::string, 5> default_implementation_sections() {
  return {
      "You are an expert in network topology and configuration. You will "
      "receive a textual representation of a network topology, a device "
      "configurations file, and a user intent.",

      "Update the textual representation of the topology if a change is "
      "required to align with the user's intent.",

      "Configure any added component (e.g., router) and update the device "
      "configurations file accordingly.",

      "Provide explanations for the changes made.",

      "Answer with the following sections, each introduced by its sentinel "
      "line.\n"
      "=== TOPOLOGY ===\n"
      "The updated topology as a JSON document in this format (omit the whole "
      "section when the topology is unchanged):\n{{SCHEMA}}\n"
      "=== CONFIGS ===\n"
      "The complete updated device configurations file, one `!=== device: "
      "<name> ===` header line per device followed by that device's "
      "configuration text. This section is mandatory.\n"
      "=== EXPLANATION ===\n"
      "A concise explanation of the changes made.",
  };
}

namespace {

std::string substitute_schema(std::string text) {
  const std::string token = "{{SCHEMA}}";
  size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), schema_description());
    pos += schema_description().size();
  }
  return text;
}

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

PromptTemplate PromptTemplate::from_text(const std::string& text) {
  std::array<std::string, 5> sections;
  size_t index = 0;
  std::istringstream in(text);
  std::string line;
  std::string current;
  auto flush = [&] {
    if (index < sections.size()) sections[index] = trim(current);
    current.clear();
    ++index;
  };
  while (std::getline(in, line)) {
    std::string stripped = line;
    if (!stripped.empty() && stripped.back() == '\r') stripped.pop_back();
    if (stripped == "---") {
      flush();
    } else {
      current += line;
      current += '\n';
    }
  }
  flush();

  PromptTemplate tmpl;
  std::array<std::optional<std::string>*, 5> slots{
      &tmpl.role, &tmpl.task, &tmpl.extras, &tmpl.constraints,
      &tmpl.output_format};
  for (size_t i = 0; i < slots.size(); ++i) {
    if (i < index && !sections[i].empty()) *slots[i] = sections[i];
  }
  return tmpl;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  return from_text(read_file(path));
}

std::string render_instructions(const PromptTemplate& tmpl,
                                const std::array<std::string, 5>& defaults) {
  std::array<const std::optional<std::string>*, 5> slots{
      &tmpl.role, &tmpl.task, &tmpl.extras, &tmpl.constraints,
      &tmpl.output_format};
  std::string out;
  for (size_t i = 0; i < slots.size(); ++i) {
    const std::string& section = slots[i]->has_value() ? **slots[i] : defaults[i];
    out += substitute_schema(section);
    out += "\n\n";
  }
  return out;
}

}  // namespace genet
