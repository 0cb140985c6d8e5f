#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// Full-precision decimal form so regression diffs are byte-stable.
[[nodiscard]] inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Plain CSV with a leading '#'-prefixed metadata block. Callers control row
// and metadata order; nothing time- or host-dependent is added here, so a
// rerun with the same inputs writes an identical file.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
  }

  void meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << "=" << value << "\n";
  }

  void meta(const std::string& key, double value) { meta(key, format_full(value)); }

  void header(const std::vector<std::string>& cols) { line(cols); }

  void row(const std::vector<std::string>& cells) { line(cells); }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

}  // namespace uwblink
