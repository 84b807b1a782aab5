#include "rgan/data/csv.hpp"

#include <charconv>

#include "rgan/core/error.hpp"

namespace rgan::data {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (header) {
      t.header = std::move(cells);
      header = false;
    } else {
      if (cells.size() != t.header.size())
        throw ParseError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                             std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()),
                         t.rows.size() + 1, cells.size());
      t.rows.push_back(std::move(cells));
    }
  }
  if (header) throw SchemaError(path.string() + " has no header row");
  return t;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header,
                     const std::string& comment)
    : out_(path), width_(header.size()), path_(path) {
  if (!out_) throw SchemaError("cannot write " + path.string());
  if (!comment.empty()) out_ << "# " << comment << '\n';
  write(header);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw ContractError("csv row width does not match header of " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  if (!out_) throw SchemaError("failed writing " + path_.string());
}

}  // namespace rgan::data
