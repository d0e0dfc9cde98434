#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace remsched::csv {

/// Formats a double with 6 significant digits. All CSV emitters go through
/// this so repeated runs produce byte-identical files.
inline std::string fmt(double x, int sig = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig, x);
  return buf;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace remsched::csv
