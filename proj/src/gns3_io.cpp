#include "genet/gns3_io.hpp"

#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include <json.hpp>

#include "genet/io_util.hpp"

namespace genet::gns3 {

using nlohmann::json;

namespace {

DeviceKind kind_from_node_type(const std::string& node_type) {
  static const std::map<std::string, DeviceKind> table{
      {"dynamips", DeviceKind::Router},
      {"iou", DeviceKind::Router},
      {"ethernet_switch", DeviceKind::Switch},
      {"frame_relay_switch", DeviceKind::Switch},
      {"atm_switch", DeviceKind::Switch},
      {"ethernet_hub", DeviceKind::Hub},
      {"vpcs", DeviceKind::Pc},
      {"cloud", DeviceKind::Cloud},
      {"nat", DeviceKind::Cloud},
  };
  auto it = table.find(node_type);
  return it == table.end() ? DeviceKind::Other : it->second;
}

DeviceKind kind_from_symbol(const std::string& symbol) {
  std::string s = normalize_label(symbol);
  struct Keyword {
    const char* needle;
    DeviceKind kind;
  };
  static const Keyword keywords[] = {
      {"router", DeviceKind::Router},   {"switch", DeviceKind::Switch},
      {"firewall", DeviceKind::Firewall}, {"asa", DeviceKind::Firewall},
      {"server", DeviceKind::Server},   {"cloud", DeviceKind::Cloud},
      {"phone", DeviceKind::Phone},     {"hub", DeviceKind::Hub},
      {"workstation", DeviceKind::Pc},  {"computer", DeviceKind::Pc},
      {"pc", DeviceKind::Pc},
  };
  for (const auto& [needle, kind] : keywords) {
    if (s.find(needle) != std::string::npos) return kind;
  }
  return DeviceKind::Other;
}

std::string iface_label(int adapter, int port) {
  return "a" + std::to_string(adapter) + "/p" + std::to_string(port);
}

// Inverse of iface_label; nullopt for labels outside the a<n>/p<m> pattern.
std::optional<std::pair<int, int>> parse_iface_label(const std::string& label) {
  static const std::regex pattern(R"(^a(\d+)/p(\d+)$)");
  std::smatch match;
  if (!std::regex_match(label, match, pattern)) return std::nullopt;
  return std::make_pair(std::stoi(match[1]), std::stoi(match[2]));
}

struct ExportPorts {
  std::set<std::pair<int, int>> used;
  int next = 0;

  std::pair<int, int> allocate() {
    while (used.count({0, next})) ++next;
    used.insert({0, next});
    return {0, next};
  }
};

}  // namespace

ImportResult import_project(const std::filesystem::path& project_file) {
  std::string text = read_file(project_file);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::NotAGns3Project,
          "'" + project_file.string() + "' is not a JSON project document");
  }
  if (!doc.contains("topology") || !doc["topology"].is_object()) {
    raise(Errc::UnsupportedVersion,
          "project document has no 'topology' section");
  }
  const json& topology = doc["topology"];

  ImportResult result;
  TopologyRepresentation& rep = result.bundle.topology;

  std::map<std::string, std::string> label_by_node_id;
  if (topology.contains("nodes") && topology["nodes"].is_array()) {
    for (const auto& n : topology["nodes"]) {
      TopologyNode node;
      node.id = n.value("node_id", "");
      node.label = n.value("name", "");
      if (node.id.empty()) {
        result.warnings.push_back("skipping node without node_id");
        continue;
      }
      std::string node_type = n.value("node_type", "");
      std::string symbol = n.value("symbol", "");
      node.kind = kind_from_node_type(node_type);
      if (node.kind == DeviceKind::Other && !symbol.empty()) {
        node.kind = kind_from_symbol(symbol);
      }
      if (node.kind == DeviceKind::Other) {
        result.warnings.push_back("node '" + node.label +
                                  "' has unmapped type '" + node_type +
                                  "', kind set to other");
      }
      node.icon_hint = symbol;
      label_by_node_id[node.id] = node.label;
      rep.nodes.push_back(std::move(node));
    }
  }

  if (topology.contains("links") && topology["links"].is_array()) {
    for (const auto& l : topology["links"]) {
      if (!l.contains("nodes") || !l["nodes"].is_array() ||
          l["nodes"].size() != 2) {
        result.warnings.push_back("skipping link without two endpoints");
        continue;
      }
      const json& end_a = l["nodes"][0];
      const json& end_b = l["nodes"][1];
      TopologyLink link;
      link.endpoint_a = end_a.value("node_id", "");
      link.endpoint_b = end_b.value("node_id", "");
      link.iface_a =
          iface_label(end_a.value("adapter_number", 0), end_a.value("port_number", 0));
      link.iface_b =
          iface_label(end_b.value("adapter_number", 0), end_b.value("port_number", 0));
      link.label = l.value("comment", "");
      rep.links.push_back(std::move(link));
    }
  }

  rep = canonicalize(std::move(rep));

  std::filesystem::path config_dir = project_file.parent_path() / "configs";
  for (const auto& node : rep.nodes) {
    if (node.label.empty()) continue;
    std::filesystem::path config_file = config_dir / (node.label + ".cfg");
    if (std::filesystem::exists(config_file)) {
      result.bundle.configs.entries.emplace_back(node.label,
                                                 read_file(config_file));
    }
  }
  return result;
}

void export_project(const SpecificationBundle& bundle,
                    const std::filesystem::path& out_dir,
                    const std::string& project_name) {
  TopologyRepresentation rep = canonicalize(bundle.topology);

  struct ExportInfo {
    const char* node_type;
    const char* symbol;
  };
  auto export_info = [](DeviceKind kind) -> ExportInfo {
    switch (kind) {
      case DeviceKind::Router: return {"dynamips", ":/symbols/router.svg"};
      case DeviceKind::Switch: return {"ethernet_switch", ":/symbols/ethernet_switch.svg"};
      case DeviceKind::Pc: return {"vpcs", ":/symbols/computer.svg"};
      case DeviceKind::Server: return {"qemu", ":/symbols/server.svg"};
      case DeviceKind::Firewall: return {"qemu", ":/symbols/firewall.svg"};
      case DeviceKind::Cloud: return {"cloud", ":/symbols/cloud.svg"};
      case DeviceKind::Phone: return {"qemu", ":/symbols/phone.svg"};
      case DeviceKind::Hub: return {"ethernet_hub", ":/symbols/hub.svg"};
      case DeviceKind::Other: return {"qemu", ":/symbols/qemu_guest.svg"};
    }
    return {"qemu", ":/symbols/qemu_guest.svg"};
  };

  json nodes = json::array();
  std::map<std::string, std::string> export_id;  // rep id -> generated node_id
  std::map<std::string, ExportPorts> ports;
  constexpr int kGridColumns = 5;
  for (size_t i = 0; i < rep.nodes.size(); ++i) {
    const TopologyNode& node = rep.nodes[i];
    char generated[16];
    std::snprintf(generated, sizeof(generated), "node-%04zu", i + 1);
    export_id[node.id] = generated;
    ExportInfo info = export_info(node.kind);
    nodes.push_back(json{
        {"compute_id", "local"},
        {"name", node.label.empty() ? node.id : node.label},
        {"node_id", generated},
        {"node_type", info.node_type},
        {"symbol", info.symbol},
        {"x", static_cast<int>(i % kGridColumns) * 150},
        {"y", static_cast<int>(i / kGridColumns) * 120},
    });
  }

  // First pass reserves ports named by pattern labels so sequential
  // assignment cannot collide with them.
  for (const auto& link : rep.links) {
    if (auto parsed = parse_iface_label(link.iface_a)) {
      ports[link.endpoint_a].used.insert(*parsed);
    }
    if (auto parsed = parse_iface_label(link.iface_b)) {
      ports[link.endpoint_b].used.insert(*parsed);
    }
  }

  json links = json::array();
  for (size_t i = 0; i < rep.links.size(); ++i) {
    const TopologyLink& link = rep.links[i];
    auto endpoint = [&](const std::string& node_id, const std::string& iface,
                        std::string& comment) {
      std::pair<int, int> port;
      if (auto parsed = parse_iface_label(iface)) {
        port = *parsed;
      } else {
        port = ports[node_id].allocate();
        if (!iface.empty()) {
          if (!comment.empty()) comment += "; ";
          comment += iface;
        }
      }
      return json{{"node_id", export_id.at(node_id)},
                  {"adapter_number", port.first},
                  {"port_number", port.second}};
    };
    std::string comment = link.label;
    json endpoints = json::array();
    endpoints.push_back(endpoint(link.endpoint_a, link.iface_a, comment));
    endpoints.push_back(endpoint(link.endpoint_b, link.iface_b, comment));
    json l{{"link_id", "link-" + std::to_string(i + 1)}, {"nodes", endpoints}};
    if (!comment.empty()) l["comment"] = comment;
    links.push_back(std::move(l));
  }

  json project{
      {"name", project_name},
      {"project_id", "00000000-0000-0000-0000-000000000000"},
      {"revision", 9},
      {"type", "topology"},
      {"version", "2.2.0"},
      {"topology",
       {{"computes", json::array()},
        {"drawings", json::array()},
        {"nodes", nodes},
        {"links", links}}},
  };

  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / (project_name + ".gns3"), project.dump(2) + "\n");

  std::filesystem::path config_dir = out_dir / "configs";
  std::filesystem::create_directories(config_dir);
  for (const auto& [name, config] : bundle.configs.entries) {
    write_file_atomic(config_dir / (name + ".cfg"), config);
  }
}

}  // namespace genet::gns3
