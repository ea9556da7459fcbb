#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "absurd/error.hpp"

namespace absurd {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open for reading: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, "read failed: " + path);
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorKind::kIo, "cannot create directory: " + p.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write failed: " + path);
}

}  // namespace absurd
