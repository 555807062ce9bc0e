#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "genet/topo_model.hpp"

namespace genet::gns3 {

struct ImportResult {
  SpecificationBundle bundle;
  std::vector<std::string> warnings;
};

/// Reads a v2-shaped project document. Device configs are picked up from
/// `configs/<device name>.cfg` next to the project file when present.
ImportResult import_project(const std::filesystem::path& project_file);

/// Writes `<name>.gns3` plus one `configs/<device>.cfg` per bundle entry
/// into out_dir. The project is a wiring skeleton: generated node ids,
/// auto-grid coordinates, no appliance images.
void export_project(const SpecificationBundle& bundle,
                    const std::filesystem::path& out_dir,
                    const std::string& project_name = "genet-export");

}  // namespace genet::gns3
