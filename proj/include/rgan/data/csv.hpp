#pragma once

#include <concepts>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace rgan::data {

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Splits on commas and trims blanks; no quoting.
std::vector<std::string> split_csv_line(std::string_view line);

/// Header plus rows of string cells, '#' comment lines skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv_table(const std::filesystem::path& path);

/// Fixed-header CSV output. Each row must have as many cells as the header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header,
            const std::string& comment = {});

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> v;
    v.reserve(sizeof...(cells));
    (v.push_back(cell(cells)), ...);
    write(v);
  }
  void write(const std::vector<std::string>& cells);

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_double(v); }
  template <std::integral I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ofstream out_;
  std::size_t width_;
  std::filesystem::path path_;
};

}  // namespace rgan::data
