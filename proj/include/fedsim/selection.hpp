#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/share_spec.hpp"

namespace fedsim {

// One client's reported performance, as the server sees it.
struct ClientPerf {
  int client_id = 0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double last_round_duration = 0.0;  // simulated seconds; 0 until first selected
};

enum class StrategyKind { full, random_k, poc, oort_lite, deev, acsp_fl };

struct StrategyConfig {
  StrategyKind kind = StrategyKind::full;
  double k_fraction = 0.5;          // random_k / poc / oort_lite
  double decay = 0.005;             // deev / acsp_fl
  std::uint64_t seed = 0;           // random_k
  double oort_delay_target = 1.0;   // seconds
  double oort_delay_exponent = 1.0;
};

// Clients whose accuracy is <= the mean accuracy, worst first, ties by
// ascending client_id. Never empty: the minimum is always <= the mean.
std::vector<int> filter_clients(const std::vector<ClientPerf>& perfs);

// ceil(selected_size * (1 - decay)^round), clamped to >= 1.
int decay_count(int selected_size, int round, double decay);

// Filter by mean accuracy, then keep the first decay_count entries.
std::vector<int> select_acsp(const std::vector<ClientPerf>& perfs, int round,
                             const StrategyConfig& cfg);

// Uniform sample of ceil(k_fraction * |ids|) without replacement, keyed on
// (seed, round); result sorted ascending.
std::vector<int> select_random_k(const std::vector<int>& client_ids, double k_fraction,
                                 int round, std::uint64_t seed);

// The ceil(k_fraction * |perfs|) clients with the highest mean_loss,
// loss-descending, ties by ascending client_id.
std::vector<int> select_poc(const std::vector<ClientPerf>& perfs, double k_fraction);

// Loss-based utility with a multiplicative delay penalty:
//   utility = mean_loss * min(1, (delay_target / max(duration, eps))^exponent)
// Top ceil(k_fraction * |perfs|) by utility, ties by ascending client_id.
std::vector<int> select_oort_lite(const std::vector<ClientPerf>& perfs, double k_fraction,
                                  const StrategyConfig& cfg);

// Layers to share given an accuracy: all of them while accuracy <= 0.25,
// otherwise ceil(1/accuracy) clamped to [1, total_layers]. Non-increasing
// in accuracy.
int dynamic_layer_count(double accuracy, int total_layers);

// Prefix spec {0, ..., layer_count-1}; set from_tail for the suffix instead.
ShareSpec make_share_spec(int layer_count, int total_layers, bool from_tail = false);

}  // namespace fedsim
