#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fedsim/experiment.hpp"

namespace fedsim {

// Reports plus a materialized copy of the config (config.json) in out_dir.
void write_run_outputs(const RunOutput& out, const std::filesystem::path& out_dir);

struct CompareRow {
  std::string strategy;
  double mean_acc = 0.0;
  long long total_uplink_bytes = 0;
  double sim_seconds = 0.0;
  double overhead_red = 0.0;
  double efficiency_value = 0.0;
};

// Run every strategy on the shared seed/dataset, FedAvg-full always included
// as the overhead baseline and listed first. Per-strategy reports land in
// out_dir/<strategy>/, the roll-up in out_dir/comparison.csv.
std::vector<CompareRow> compare_strategies(const ExperimentConfig& base,
                                           const std::vector<std::string>& strategy_names,
                                           const std::filesystem::path& out_dir);

std::string comparison_csv_text(const std::vector<CompareRow>& rows);

}  // namespace fedsim
