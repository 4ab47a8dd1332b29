#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fuzzanon/data_model.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return FUZZANON_DATA_DIR; }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fuzzanon_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline fuzzanon::Attribute attr(std::string name, fuzzanon::AttributeRole role, fuzzanon::AttributeKind kind) {
  fuzzanon::Attribute a;
  a.name = std::move(name);
  a.role = role;
  a.kind = kind;
  return a;
}

inline fuzzanon::Attribute numeric(std::string name, fuzzanon::AttributeRole role = fuzzanon::AttributeRole::NonSensitive) {
  return attr(std::move(name), role, fuzzanon::AttributeKind::Numeric);
}

inline fuzzanon::Attribute categorical(std::string name,
                                       fuzzanon::AttributeRole role = fuzzanon::AttributeRole::NonSensitive) {
  return attr(std::move(name), role, fuzzanon::AttributeKind::Categorical);
}

inline fuzzanon::CellValue num(double v) { return fuzzanon::CellValue::numeric(v); }
inline fuzzanon::CellValue txt(std::string s) { return fuzzanon::CellValue::text(std::move(s)); }
inline fuzzanon::CellValue missing() { return fuzzanon::CellValue::missing(); }

}  // namespace testing
