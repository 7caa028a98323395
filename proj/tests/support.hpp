#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cellforest/frame.hpp"

namespace cftest {

using cellforest::Label;
using cellforest::LabeledFrame;

// '.' is background, '1'..'9' and 'a'..'z' are labels 1..35.
inline LabeledFrame art(int index, std::initializer_list<std::string_view> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.begin()->size());
  LabeledFrame frame(index, w, h);
  int y = 0;
  for (std::string_view row : rows) {
    for (int x = 0; x < w; ++x) {
      const char c = row[x];
      Label l = 0;
      if (c >= '1' && c <= '9') l = static_cast<Label>(c - '0');
      if (c >= 'a' && c <= 'z') l = static_cast<Label>(c - 'a' + 10);
      frame.at(x, y) = l;
    }
    ++y;
  }
  return frame;
}

inline void paint_rect(LabeledFrame& f, Label l, int x0, int y0, int x1, int y1) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) f.at(x, y) = l;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cellforest_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace cftest
