#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "stackrag/errors.hpp"

namespace stackrag {

inline std::optional<std::string> read_file_if_exists(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return out.str();
}

inline std::string read_file_or_throw(const std::filesystem::path& path) {
  auto content = read_file_if_exists(path);
  if (!content) throw StorageError("cannot read " + path.string());
  return *content;
}

// Write-then-rename so readers never observe a half-written file.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot open " + tmp.string() + " for write");
    out << content;
    out.flush();
    if (!out) throw StorageError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError("rename to " + path.string() + " failed");
  }
}

inline void append_to_file(const std::filesystem::path& path,
                           const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StorageError("cannot open " + path.string() + " for append");
  out << content;
  out.flush();
  if (!out) throw StorageError("append to " + path.string() + " failed");
}

inline std::uint64_t file_size_or_zero(const std::filesystem::path& path) {
  std::error_code ec;
  auto size = std::filesystem::file_size(path, ec);
  return ec ? 0 : static_cast<std::uint64_t>(size);
}

}  // namespace stackrag
