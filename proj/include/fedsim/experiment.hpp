#pragma once

#include <optional>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/metrics.hpp"

namespace fedsim {

struct ExperimentResult {
  std::vector<RoundLog> logs;
  std::vector<ClientPerf> final_perfs;
  std::vector<int> resolved_model_dims;
};

// Materialize the dataset, build client and server state, run cfg.rounds
// rounds (the first one trains every client) and collect the logs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Client splits exactly as run_experiment would see them.
std::vector<ClientSplit> materialize_clients(const ExperimentConfig& cfg);

struct RunOutput {
  ExperimentConfig config;
  ExperimentResult result;
  RunSummary summary;
};

// run_experiment + summarize against an optional baseline time.
RunOutput execute_run(const ExperimentConfig& cfg,
                      std::optional<double> baseline_time = std::nullopt);

}  // namespace fedsim
