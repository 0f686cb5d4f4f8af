#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace reslab {

// Round-trip decimal formatting ('.' separator, shortest exact form).
std::string format_double(double v);

std::uint64_t fnv1a_hash(const std::string& data);

// CSV with a leading meta row (tool version, config hash, seed), then a
// column header row; every row newline-terminated.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& meta,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(long v) { return std::to_string(v); }

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

std::string meta_line(std::uint64_t config_hash, std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace reslab
