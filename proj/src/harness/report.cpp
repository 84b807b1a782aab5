#include "rgan/harness/report.hpp"

#include <algorithm>

#include "rgan/core/error.hpp"
#include "rgan/data/csv.hpp"

namespace rgan::harness {

std::size_t ReportTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ContractError("report has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

const std::string& ReportTable::at(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

void write_table(const ReportTable& table, const std::filesystem::path& path) {
  data::CsvWriter csv(path, table.header, table.comment);
  for (const auto& r : table.rows) csv.write(r);
}

ReportTable read_table(const std::filesystem::path& path) {
  auto t = data::read_csv_table(path);
  return {std::move(t.header), std::move(t.rows), {}};
}

void write_trace_csv(const gan::TrainTrace& trace, const std::filesystem::path& path) {
  data::CsvWriter csv(path, {"iteration", "critic_loss", "generator_loss", "regression_loss", "wasserstein"});
  for (const auto& r : trace.records)
    csv.row(r.iteration, r.critic_loss, r.generator_loss, r.regression_loss, r.wasserstein);
}

void write_acquisition_csv(std::span<const active::AcquisitionStep> log, const std::filesystem::path& path) {
  data::CsvWriter csv(path, {"step", "index", "d_x", "d_y", "r", "score"});
  for (const auto& s : log) csv.row(s.step, s.index, s.d_x, s.d_y, s.r, s.score);
}

}  // namespace rgan::harness
