#include "fedsim/experiment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fedsim/rng.hpp"

namespace fedsim {

std::vector<ClientSplit> materialize_clients(const ExperimentConfig& cfg) {
  if (cfg.dataset.type == DatasetConfig::Type::synthetic) {
    const SyntheticSpec& s = cfg.dataset.synthetic;
    const Dataset data = generate_blobs(s.num_classes, s.dim, s.samples_per_class, s.spread,
                                        mix_seed({cfg.seed, 0xb10bull}));
    PartitionSpec part = cfg.partition;
    part.seed = mix_seed({cfg.seed, 0x9a27ull});
    return partition(data, part);
  }
  CsvSchema schema;
  schema.test_fraction = cfg.dataset.csv_test_fraction;
  schema.seed = mix_seed({cfg.seed, 0xc57ull});
  return load_csv(cfg.dataset.csv_path, schema).clients;
}

namespace {

std::vector<int> resolve_dims(const ExperimentConfig& cfg, const std::vector<ClientSplit>& clients) {
  const int width = static_cast<int>(clients.front().train.feature_dim());
  const int classes = clients.front().train.num_classes;
  if (cfg.model_dims.empty()) return {width, 256, 256, 256, classes};
  if (cfg.model_dims.front() != width)
    throw ConfigError({"model_dims: first entry " + std::to_string(cfg.model_dims.front()) +
                       " does not match the dataset feature width " + std::to_string(width)});
  if (cfg.model_dims.back() != classes)
    throw ConfigError({"model_dims: last entry " + std::to_string(cfg.model_dims.back()) +
                       " does not match the dataset class count " + std::to_string(classes)});
  return cfg.model_dims;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::vector<ClientSplit> splits = materialize_clients(cfg);
  const std::vector<int> dims = resolve_dims(cfg, splits);
  if (cfg.share_mode == ShareMode::fixed &&
      cfg.shared_layers > static_cast<int>(dims.size()) - 1)
    throw ConfigError({"shared_layers: exceeds the model's layer count"});

  ServerState server;
  server.global_params = init_params(dims, mix_seed({cfg.seed, 0x121ull}));
  server.strategy = cfg.strategy;
  server.strategy.seed = mix_seed({cfg.seed, 0x5e1ull});
  server.share_mode = cfg.share_mode;
  server.fixed_layers = cfg.shared_layers;
  server.share_from_tail = cfg.share_from_tail;
  server.personalization = cfg.personalization;

  std::vector<ClientState> clients;
  clients.reserve(splits.size());
  for (auto& split : splits) {
    ClientState state;
    state.client_id = split.client_id;
    state.local_params = server.global_params;
    state.split = std::move(split);
    clients.push_back(std::move(state));
  }

  // the first round always trains everyone
  server.selected.clear();
  for (const auto& c : clients) server.selected.push_back(c.client_id);
  std::sort(server.selected.begin(), server.selected.end());

  TrainConfig train = cfg.train;
  train.seed = mix_seed({cfg.seed, 0x7217ull});

  ExperimentResult result;
  result.resolved_model_dims = dims;
  result.logs.reserve(cfg.rounds);
  for (int round = 0; round < cfg.rounds; ++round)
    result.logs.push_back(run_round(server, clients, cfg.cost, train));

  result.final_perfs.reserve(clients.size());
  for (const auto& c : clients)
    result.final_perfs.push_back({c.client_id, c.last_accuracy, c.last_loss,
                                  c.last_round_duration});
  return result;
}

RunOutput execute_run(const ExperimentConfig& cfg, std::optional<double> baseline_time) {
  RunOutput out{cfg, run_experiment(cfg), {}};
  out.summary = summarize(out.result.logs, out.result.final_perfs, cfg.efficiency, baseline_time);
  return out;
}

}  // namespace fedsim
