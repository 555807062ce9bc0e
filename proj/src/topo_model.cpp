#include "genet/topo_model.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

namespace genet {

using nlohmann::json;

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedRepresentation: return "MalformedRepresentation";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::DuplicateDevice: return "DuplicateDevice";
    case Errc::MissingDelimiter: return "MissingDelimiter";
    case Errc::AuthError: return "AuthError";
    case Errc::TransportError: return "TransportError";
    case Errc::MissingTranscript: return "MissingTranscript";
    case Errc::RateLimited: return "RateLimited";
    case Errc::InvalidRequest: return "InvalidRequest";
    case Errc::UnsupportedImageFormat: return "UnsupportedImageFormat";
    case Errc::UnparseableModelOutput: return "UnparseableModelOutput";
    case Errc::ModelRefused: return "ModelRefused";
    case Errc::MissingConfigSection: return "MissingConfigSection";
    case Errc::DuplicateSection: return "DuplicateSection";
    case Errc::MalformedSolution: return "MalformedSolution";
    case Errc::EmptyTruth: return "EmptyTruth";
    case Errc::MissingManualAward: return "MissingManualAward";
    case Errc::UnknownPredicate: return "UnknownPredicate";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::PooledVarianceZero: return "PooledVarianceZero";
    case Errc::InvalidManifest: return "InvalidManifest";
    case Errc::JoinError: return "JoinError";
    case Errc::NotAGns3Project: return "NotAGns3Project";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

const char* to_string(DeviceKind kind) noexcept {
  switch (kind) {
    case DeviceKind::Router: return "router";
    case DeviceKind::Switch: return "switch";
    case DeviceKind::Pc: return "pc";
    case DeviceKind::Server: return "server";
    case DeviceKind::Firewall: return "firewall";
    case DeviceKind::Cloud: return "cloud";
    case DeviceKind::Phone: return "phone";
    case DeviceKind::Hub: return "hub";
    case DeviceKind::Other: return "other";
  }
  return "other";
}

DeviceKind device_kind_from_string(std::string_view text) noexcept {
  std::string s = normalize_label(text);
  if (s == "router") return DeviceKind::Router;
  if (s == "switch") return DeviceKind::Switch;
  if (s == "pc") return DeviceKind::Pc;
  if (s == "server") return DeviceKind::Server;
  if (s == "firewall") return DeviceKind::Firewall;
  if (s == "cloud") return DeviceKind::Cloud;
  if (s == "phone") return DeviceKind::Phone;
  if (s == "hub") return DeviceKind::Hub;
  return DeviceKind::Other;
}

const TopologyNode* TopologyRepresentation::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

// Orients a link so endpoint_a <= endpoint_b, swapping interface labels along.
TopologyLink oriented(TopologyLink link) {
  if (link.endpoint_b < link.endpoint_a) {
    std::swap(link.endpoint_a, link.endpoint_b);
    std::swap(link.iface_a, link.iface_b);
  }
  return link;
}

auto link_sort_key(const TopologyLink& l) {
  return std::tie(l.endpoint_a, l.endpoint_b, l.label, l.iface_a, l.iface_b);
}

}  // namespace

void validate_representation(const TopologyRepresentation& rep) {
  std::unordered_set<std::string> ids;
  for (const auto& node : rep.nodes) {
    if (node.id.empty()) {
      raise(Errc::MalformedRepresentation, "node with empty id");
    }
    if (!ids.insert(node.id).second) {
      raise(Errc::MalformedRepresentation, "duplicate node id '" + node.id + "'");
    }
  }
  for (const auto& link : rep.links) {
    if (!ids.count(link.endpoint_a)) {
      raise(Errc::DanglingReference,
            "link references unknown node id '" + link.endpoint_a + "'");
    }
    if (!ids.count(link.endpoint_b)) {
      raise(Errc::DanglingReference,
            "link references unknown node id '" + link.endpoint_b + "'");
    }
    if (link.endpoint_a == link.endpoint_b) {
      raise(Errc::MalformedRepresentation,
            "self-loop on node '" + link.endpoint_a + "'");
    }
  }
  std::unordered_set<std::string> group_ids;
  for (const auto& group : rep.groups) {
    if (group.group_id.empty()) {
      raise(Errc::MalformedRepresentation, "group with empty group_id");
    }
    if (!group_ids.insert(group.group_id).second) {
      raise(Errc::MalformedRepresentation,
            "duplicate group_id '" + group.group_id + "'");
    }
    for (const auto& member : group.member_node_ids) {
      if (!ids.count(member)) {
        raise(Errc::DanglingReference, "group '" + group.group_id +
                                           "' references unknown node id '" +
                                           member + "'");
      }
    }
  }
}

TopologyRepresentation canonicalize(TopologyRepresentation rep) {
  validate_representation(rep);
  std::sort(rep.nodes.begin(), rep.nodes.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& link : rep.links) link = oriented(std::move(link));
  std::sort(rep.links.begin(), rep.links.end(), [](const auto& a, const auto& b) {
    return link_sort_key(a) < link_sort_key(b);
  });
  rep.links.erase(std::unique(rep.links.begin(), rep.links.end()), rep.links.end());
  for (auto& group : rep.groups) {
    std::sort(group.member_node_ids.begin(), group.member_node_ids.end());
    group.member_node_ids.erase(
        std::unique(group.member_node_ids.begin(), group.member_node_ids.end()),
        group.member_node_ids.end());
  }
  std::sort(rep.groups.begin(), rep.groups.end(),
            [](const auto& a, const auto& b) { return a.group_id < b.group_id; });
  return rep;
}

namespace {

std::string require_string(const json& obj, const char* key, const char* ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    raise(Errc::MalformedRepresentation,
          std::string(ctx) + " is missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    raise(Errc::MalformedRepresentation,
          std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

TopologyRepresentation parse_representation(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::MalformedRepresentation, "document is not a JSON object");
  }

  TopologyRepresentation rep;
  if (doc.contains("nodes")) {
    if (!doc["nodes"].is_array()) {
      raise(Errc::MalformedRepresentation, "'nodes' must be an array");
    }
    for (const auto& n : doc["nodes"]) {
      if (!n.is_object()) {
        raise(Errc::MalformedRepresentation, "node entry must be an object");
      }
      TopologyNode node;
      node.id = require_string(n, "id", "node");
      node.label = optional_string(n, "label");
      node.kind = device_kind_from_string(optional_string(n, "kind"));
      node.icon_hint = optional_string(n, "icon_hint");
      node.group_id = optional_string(n, "group_id");
      rep.nodes.push_back(std::move(node));
    }
  }
  if (doc.contains("links")) {
    if (!doc["links"].is_array()) {
      raise(Errc::MalformedRepresentation, "'links' must be an array");
    }
    for (const auto& l : doc["links"]) {
      if (!l.is_object()) {
        raise(Errc::MalformedRepresentation, "link entry must be an object");
      }
      TopologyLink link;
      link.endpoint_a = require_string(l, "a", "link");
      link.endpoint_b = require_string(l, "b", "link");
      link.label = optional_string(l, "label");
      link.iface_a = optional_string(l, "iface_a");
      link.iface_b = optional_string(l, "iface_b");
      rep.links.push_back(std::move(link));
    }
  }
  if (doc.contains("groups")) {
    if (!doc["groups"].is_array()) {
      raise(Errc::MalformedRepresentation, "'groups' must be an array");
    }
    for (const auto& g : doc["groups"]) {
      if (!g.is_object()) {
        raise(Errc::MalformedRepresentation, "group entry must be an object");
      }
      LogicalGroup group;
      group.group_id = require_string(g, "group_id", "group");
      group.name = optional_string(g, "name");
      if (g.contains("members")) {
        if (!g["members"].is_array()) {
          raise(Errc::MalformedRepresentation, "'members' must be an array");
        }
        for (const auto& m : g["members"]) {
          if (!m.is_string()) {
            raise(Errc::MalformedRepresentation, "group member must be a string");
          }
          group.member_node_ids.push_back(m.get<std::string>());
        }
      }
      rep.groups.push_back(std::move(group));
    }
  }
  rep.notes = optional_string(doc, "notes");
  return canonicalize(std::move(rep));
}

std::string emit_representation(const TopologyRepresentation& rep) {
  TopologyRepresentation canon = canonicalize(rep);

  // nlohmann::json orders object keys alphabetically, which keeps the
  // emission deterministic without extra bookkeeping.
  json doc;
  doc["nodes"] = json::array();
  for (const auto& node : canon.nodes) {
    json n{{"id", node.id}, {"label", node.label}, {"kind", to_string(node.kind)}};
    if (!node.icon_hint.empty()) n["icon_hint"] = node.icon_hint;
    if (!node.group_id.empty()) n["group_id"] = node.group_id;
    doc["nodes"].push_back(std::move(n));
  }
  doc["links"] = json::array();
  for (const auto& link : canon.links) {
    json l{{"a", link.endpoint_a}, {"b", link.endpoint_b}};
    if (!link.label.empty()) l["label"] = link.label;
    if (!link.iface_a.empty()) l["iface_a"] = link.iface_a;
    if (!link.iface_b.empty()) l["iface_b"] = link.iface_b;
    doc["links"].push_back(std::move(l));
  }
  doc["groups"] = json::array();
  for (const auto& group : canon.groups) {
    doc["groups"].push_back(json{{"group_id", group.group_id},
                                 {"name", group.name},
                                 {"members", group.member_node_ids}});
  }
  if (!canon.notes.empty()) doc["notes"] = canon.notes;
  return doc.dump(2) + "\n";
}

const std::string* DeviceConfigBundle::find(std::string_view device_name) const {
  for (const auto& [name, text] : entries) {
    if (name == device_name) return &text;
  }
  return nullptr;
}

namespace {

constexpr std::string_view kHeaderPrefix = "!=== device: ";
constexpr std::string_view kHeaderSuffix = " ===";

// Returns the device name when `line` (without newline) is a header line.
std::optional<std::string> match_header(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.size() < kHeaderPrefix.size() + kHeaderSuffix.size()) return std::nullopt;
  if (line.substr(0, kHeaderPrefix.size()) != kHeaderPrefix) return std::nullopt;
  if (line.substr(line.size() - kHeaderSuffix.size()) != kHeaderSuffix) return std::nullopt;
  return std::string(
      line.substr(kHeaderPrefix.size(),
                  line.size() - kHeaderPrefix.size() - kHeaderSuffix.size()));
}

bool all_whitespace(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string config_device_header(std::string_view device_name) {
  return std::string(kHeaderPrefix) + std::string(device_name) +
         std::string(kHeaderSuffix);
}

DeviceConfigBundle parse_config_bundle(const std::string& text) {
  DeviceConfigBundle bundle;
  std::unordered_set<std::string> seen;
  std::string* current = nullptr;

  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    size_t line_end = (eol == std::string::npos) ? text.size() : eol;
    std::string_view line(text.data() + pos, line_end - pos);
    size_t next = (eol == std::string::npos) ? text.size() : eol + 1;

    if (auto name = match_header(line)) {
      if (!seen.insert(*name).second) {
        raise(Errc::DuplicateDevice, "duplicate device '" + *name + "'");
      }
      bundle.entries.emplace_back(*name, std::string());
      current = &bundle.entries.back().second;
    } else if (current) {
      current->append(text, pos, next - pos);
    } else if (!all_whitespace(line)) {
      raise(Errc::MissingDelimiter,
            "configuration text before the first device header");
    }
    pos = next;
  }
  return bundle;
}

std::string emit_config_bundle(const DeviceConfigBundle& bundle) {
  std::string out;
  for (const auto& [name, config] : bundle.entries) {
    out += config_device_header(name);
    out += '\n';
    out += config;
    // A non-terminated body would swallow the next header line.
    if (!config.empty() && config.back() != '\n') out += '\n';
  }
  return out;
}

std::vector<std::string> validate_bundle(const SpecificationBundle& bundle) {
  std::set<std::string> labels;
  for (const auto& node : bundle.topology.nodes) {
    labels.insert(normalize_label(node.label));
  }
  std::vector<std::string> diagnostics;
  for (const auto& [name, config] : bundle.configs.entries) {
    if (!labels.count(normalize_label(name))) {
      diagnostics.push_back("orphan config device '" + name +
                            "': no node label matches");
    }
  }
  return diagnostics;
}

}  // namespace genet
