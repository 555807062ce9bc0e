#include "genet/io_util.hpp"

#include <fstream>

#include "genet/errors.hpp"

namespace genet {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::IoError, "cannot open '" + path.string() + "'");
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) {
    raise(Errc::IoError, "read failed for '" + path.string() + "'");
  }
  return content;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(Errc::IoError, "cannot open '" + tmp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      raise(Errc::IoError, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    raise(Errc::IoError,
          "rename '" + tmp.string() + "' -> '" + path.string() + "' failed: " +
              ec.message());
  }
}

}  // namespace genet
