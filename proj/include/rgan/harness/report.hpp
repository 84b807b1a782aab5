#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rgan/active/selection.hpp"
#include "rgan/gan/trainer.hpp"

namespace rgan::harness {

/// A CSV table with a fixed header. Column orders used by the harness:
///
///   report.csv (pipeline)   method,case,regressor,mae,rmse
///   ablation.csv            variant,case,regressor,mae,rmse
///   amount.csv              amount,regressor,mae,rmse,status
///   hyper.csv               parameter,value,regressor,mae,rmse,status
///   time.csv                variant,iterations,pretrain_seconds,train_seconds,total_seconds,ratio
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string comment;

  std::size_t column(const std::string& name) const;
  const std::string& at(std::size_t row, const std::string& name) const;
};

void write_table(const ReportTable& table, const std::filesystem::path& path);
ReportTable read_table(const std::filesystem::path& path);

/// iteration,critic_loss,generator_loss,regression_loss,wasserstein
/// (wall-clock stays in the manifest so the file is reproducible)
void write_trace_csv(const gan::TrainTrace& trace, const std::filesystem::path& path);

/// step,index,d_x,d_y,r,score with `index` a dataset row.
void write_acquisition_csv(std::span<const active::AcquisitionStep> log, const std::filesystem::path& path);

}  // namespace rgan::harness
