#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nnet.hpp"
#include "fedsim/selection.hpp"

namespace fedsim {

enum class ShareMode { full, fixed, dynamic };

// How clients keep state between rounds: composing private layers with the
// shared fragment (layers), or keeping a whole local model and picking
// local vs global by test loss (fine_tune).
enum class Personalization { layers, fine_tune };

struct CostModel {
  long long bytes_per_param = 8;
  double bandwidth_bytes_per_sec = 1.0e6;
  double client_samples_per_sec = 1000.0;
};

struct CostEntry {
  int round = 0;
  long long uplink_bytes = 0;
  long long downlink_bytes = 0;
  double simulated_round_seconds = 0.0;
  int selected_count = 0;
};

struct RoundLog {
  int round = 0;
  std::vector<int> selected;
  int shared_layers = 0;
  long long fragment_params = 0;
  std::vector<double> accuracies;  // one per client, client order
  double mean_acc = 0.0;
  double min_acc = 0.0;
  double max_acc = 0.0;
  CostEntry cost;
};

struct ClientState {
  int client_id = 0;
  ClientSplit split;
  // Full local mirror of the model; the slice outside the current ShareSpec
  // is this client's personal piece. Keeping the whole set makes round-to-
  // round ShareSpec changes (dynamic mode) well defined.
  ParamSet local_params;
  double last_accuracy = 0.0;
  double last_loss = 0.0;
  double last_round_duration = 0.0;
};

struct ServerState {
  ParamSet global_params;
  int round = 0;
  std::vector<int> selected;
  StrategyConfig strategy;
  ShareMode share_mode = ShareMode::full;
  int fixed_layers = 1;          // fixed mode
  bool share_from_tail = false;  // escape hatch; head (prefix) matches Fig-style sharing
  Personalization personalization = Personalization::layers;
  double prev_mean_accuracy = 0.0;  // drives dynamic layer selection
};

// Elementwise weighted mean of shape-identical fragments, weights d_i / sum d.
ParamSet aggregate(const std::vector<std::pair<ParamSet, long long>>& fragments);

// Compose the client's model: spec layers from global_fragment, the rest
// from the client's local mirror.
ParamSet personalize(const ClientState& client, const ParamSet& global_fragment,
                     const ShareSpec& spec);

enum class ModelChoice { local, global };

// Ties go to the local model.
ModelChoice choose_model(double local_loss, double global_loss);

struct TrainOutcome {
  ParamSet fragment;          // trained layers at spec positions
  long long sample_count = 0; // |train|
};

// Compose, run sgd_fit on the client's train split, store the whole trained
// model back into the client mirror, and return the shared slice.
TrainOutcome client_train(ClientState& client, const ParamSet& global_fragment,
                          const ShareSpec& spec, const TrainConfig& cfg);

// Every client evaluates its composed model on its own test split; updates
// last_accuracy / last_loss and returns the per-client reports.
std::vector<ClientPerf> distributed_evaluate(std::vector<ClientState>& clients,
                                             const ParamSet& global_fragment,
                                             const ShareSpec& spec);

// One communication round: share spec -> local training on the selected set
// -> weighted aggregation -> distributed evaluation -> next-round selection
// -> cost accounting. Commits state only after the whole round succeeded.
RoundLog run_round(ServerState& server, std::vector<ClientState>& clients,
                   const CostModel& cost, const TrainConfig& train_cfg);

}  // namespace fedsim
