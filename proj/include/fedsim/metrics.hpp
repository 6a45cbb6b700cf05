#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "fedsim/federation.hpp"

namespace fedsim {

struct EfficiencyConfig {
  double alpha = 0.5;
  double beta = 0.5;
};

struct RunSummary {
  double mean_accuracy = 0.0;              // final-round distributed accuracy
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  std::map<int, double> accuracy_per_client;
  long long total_uplink_bytes = 0;
  long long total_downlink_bytes = 0;
  std::map<int, long long> uplink_bytes_per_client;
  double convergence_time_seconds = 0.0;   // sum of simulated round times
  std::map<int, int> selection_counts;
  std::optional<double> efficiency;        // present when a baseline time was given
};

// 1 - solution/baseline, clamped into [0, 1].
double overhead_reduction(double solution_time, double baseline_time);

// alpha * mean_accuracy + beta * overhead_red; inputs must be in [0, 1].
double efficiency(double mean_accuracy, double overhead_red, const EfficiencyConfig& cfg);

RunSummary summarize(const std::vector<RoundLog>& logs, const std::vector<ClientPerf>& final_perfs,
                     const EfficiencyConfig& cfg, std::optional<double> baseline_time);

// Writes rounds.csv, clients.csv and summary.json into out_dir. Byte-stable
// for identical inputs.
void write_reports(const RunSummary& summary, const std::vector<RoundLog>& logs,
                   const std::filesystem::path& out_dir);

// summary.json body (alphabetical keys); parse is the exact inverse.
std::string summary_to_json_string(const RunSummary& summary);
RunSummary summary_from_json_string(const std::string& text);

}  // namespace fedsim
