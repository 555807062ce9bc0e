#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genet/errors.hpp"

namespace genet {

enum class DeviceKind {
  Router,
  Switch,
  Pc,
  Server,
  Firewall,
  Cloud,
  Phone,
  Hub,
  Other,
};

const char* to_string(DeviceKind kind) noexcept;
/// Unknown strings map to DeviceKind::Other.
DeviceKind device_kind_from_string(std::string_view text) noexcept;

struct TopologyNode {
  std::string id;
  std::string label;
  DeviceKind kind = DeviceKind::Other;
  std::string icon_hint;  // empty = absent
  std::string group_id;   // empty = absent

  bool operator==(const TopologyNode&) const = default;
};

/// Undirected edge; canonical form orients endpoint_a <= endpoint_b.
struct TopologyLink {
  std::string endpoint_a;
  std::string endpoint_b;
  std::string label;
  std::string iface_a;
  std::string iface_b;

  bool operator==(const TopologyLink&) const = default;
};

struct LogicalGroup {
  std::string group_id;
  std::string name;
  std::vector<std::string> member_node_ids;

  bool operator==(const LogicalGroup&) const = default;
};

struct TopologyRepresentation {
  std::vector<TopologyNode> nodes;
  std::vector<TopologyLink> links;
  std::vector<LogicalGroup> groups;
  std::string notes;

  bool operator==(const TopologyRepresentation&) const = default;

  const TopologyNode* find_node(std::string_view id) const;
};

/// Lowercases, trims, and collapses internal whitespace runs. Idempotent.
std::string normalize_label(std::string_view raw);

/// Checks referential integrity and uniqueness invariants; throws
/// MalformedRepresentation or DanglingReference on violation.
void validate_representation(const TopologyRepresentation& rep);

/// Validates and returns the canonical form: nodes sorted by id, links
/// oriented and sorted by endpoint pair, exact duplicate links collapsed,
/// groups sorted with sorted members.
TopologyRepresentation canonicalize(TopologyRepresentation rep);

TopologyRepresentation parse_representation(const std::string& text);
std::string emit_representation(const TopologyRepresentation& rep);

struct DeviceConfigBundle {
  /// Ordered (device_name, config_text) entries.
  std::vector<std::pair<std::string, std::string>> entries;

  bool operator==(const DeviceConfigBundle&) const = default;

  const std::string* find(std::string_view device_name) const;
};

/// Header line that separates devices inside a bundle file.
std::string config_device_header(std::string_view device_name);

DeviceConfigBundle parse_config_bundle(const std::string& text);
std::string emit_config_bundle(const DeviceConfigBundle& bundle);

struct SpecificationBundle {
  TopologyRepresentation topology;
  DeviceConfigBundle configs;

  bool operator==(const SpecificationBundle&) const = default;
};

/// Non-fatal diagnostics: one entry per config device whose name matches no
/// node label after normalization.
std::vector<std::string> validate_bundle(const SpecificationBundle& bundle);

}  // namespace genet
