#pragma once

#include <filesystem>
#include <string>

namespace genet {

std::string read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace genet
