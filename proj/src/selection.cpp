#include "fedsim/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

// ceil with a tiny downward nudge so values that are integers in exact
// arithmetic (e.g. 1/0.5, counts hitting a whole number) do not round up an
// extra step on floating-point noise.
int ceil_guard(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

int k_count(std::size_t total, double k_fraction) {
  if (!(k_fraction > 0.0) || k_fraction > 1.0)
    throw std::invalid_argument("selection: k_fraction must be in (0, 1]");
  return std::clamp(ceil_guard(k_fraction * static_cast<double>(total)), 1,
                    static_cast<int>(total));
}

}  // namespace

std::vector<int> filter_clients(const std::vector<ClientPerf>& perfs) {
  if (perfs.empty()) throw std::invalid_argument("filter_clients: empty input");
  double mean = 0.0;
  for (const auto& p : perfs) mean += p.accuracy;
  mean /= static_cast<double>(perfs.size());

  // epsilon keeps clients sitting exactly at a rational mean inside the set
  std::vector<const ClientPerf*> kept;
  for (const auto& p : perfs)
    if (p.accuracy <= mean + 1e-12) kept.push_back(&p);
  std::sort(kept.begin(), kept.end(), [](const ClientPerf* a, const ClientPerf* b) {
    if (a->accuracy != b->accuracy) return a->accuracy < b->accuracy;
    return a->client_id < b->client_id;
  });

  std::vector<int> ids;
  ids.reserve(kept.size());
  for (const auto* p : kept) ids.push_back(p->client_id);
  return ids;
}

int decay_count(int selected_size, int round, double decay) {
  if (selected_size < 1) throw std::invalid_argument("decay_count: selected_size must be >= 1");
  if (round < 0) throw std::invalid_argument("decay_count: round must be >= 0");
  if (!(decay >= 0.0) || decay >= 1.0)
    throw std::invalid_argument("decay_count: decay must be in [0, 1)");
  const double scaled = static_cast<double>(selected_size) * std::pow(1.0 - decay, round);
  return std::max(1, ceil_guard(scaled));
}

std::vector<int> select_acsp(const std::vector<ClientPerf>& perfs, int round,
                             const StrategyConfig& cfg) {
  if (cfg.kind != StrategyKind::acsp_fl && cfg.kind != StrategyKind::deev)
    throw std::invalid_argument("select_acsp: strategy kind must be acsp_fl or deev");
  std::vector<int> filtered = filter_clients(perfs);
  const int count = decay_count(static_cast<int>(filtered.size()), round, cfg.decay);
  filtered.resize(std::min<std::size_t>(filtered.size(), count));
  return filtered;
}

std::vector<int> select_random_k(const std::vector<int>& client_ids, double k_fraction,
                                 int round, std::uint64_t seed) {
  if (client_ids.empty()) throw std::invalid_argument("select_random_k: empty id list");
  const int count = k_count(client_ids.size(), k_fraction);

  std::vector<int> pool = client_ids;
  std::sort(pool.begin(), pool.end());
  Rng rng(mix_seed({seed, 0x7a2d0ull, static_cast<std::uint64_t>(round)}));
  // partial Fisher-Yates: the first `count` slots are the sample
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

std::vector<int> top_by_score(const std::vector<ClientPerf>& perfs,
                              const std::vector<double>& scores, int count) {
  std::vector<std::size_t> order(perfs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return perfs[a].client_id < perfs[b].client_id;
  });
  std::vector<int> ids;
  ids.reserve(count);
  for (int i = 0; i < count; ++i) ids.push_back(perfs[order[i]].client_id);
  return ids;
}

}  // namespace

std::vector<int> select_poc(const std::vector<ClientPerf>& perfs, double k_fraction) {
  if (perfs.empty()) throw std::invalid_argument("select_poc: empty input");
  std::vector<double> losses;
  losses.reserve(perfs.size());
  for (const auto& p : perfs) losses.push_back(p.mean_loss);
  return top_by_score(perfs, losses, k_count(perfs.size(), k_fraction));
}

std::vector<int> select_oort_lite(const std::vector<ClientPerf>& perfs, double k_fraction,
                                  const StrategyConfig& cfg) {
  if (perfs.empty()) throw std::invalid_argument("select_oort_lite: empty input");
  if (!(cfg.oort_delay_target > 0.0))
    throw std::invalid_argument("select_oort_lite: oort_delay_target must be > 0");
  if (cfg.oort_delay_exponent < 0.0)
    throw std::invalid_argument("select_oort_lite: oort_delay_exponent must be >= 0");

  constexpr double kEps = 1e-9;
  std::vector<double> utilities;
  utilities.reserve(perfs.size());
  for (const auto& p : perfs) {
    const double duration = std::max(p.last_round_duration, kEps);
    const double penalty =
        std::min(1.0, std::pow(cfg.oort_delay_target / duration, cfg.oort_delay_exponent));
    utilities.push_back(p.mean_loss * penalty);
  }
  return top_by_score(perfs, utilities, k_count(perfs.size(), k_fraction));
}

int dynamic_layer_count(double accuracy, int total_layers) {
  if (!(accuracy >= 0.0) || accuracy > 1.0)
    throw std::invalid_argument("dynamic_layer_count: accuracy must be in [0, 1]");
  if (total_layers < 1)
    throw std::invalid_argument("dynamic_layer_count: total_layers must be >= 1");
  if (accuracy <= 0.25) return total_layers;
  return std::clamp(ceil_guard(1.0 / accuracy), 1, total_layers);
}

ShareSpec make_share_spec(int layer_count, int total_layers, bool from_tail) {
  if (total_layers < 1)
    throw std::invalid_argument("make_share_spec: total_layers must be >= 1");
  if (layer_count < 1 || layer_count > total_layers)
    throw std::invalid_argument("make_share_spec: layer_count must be in [1, total_layers]");
  ShareSpec spec;
  spec.total_layers = total_layers;
  spec.layer_indices.reserve(layer_count);
  const int first = from_tail ? total_layers - layer_count : 0;
  for (int i = 0; i < layer_count; ++i) spec.layer_indices.push_back(first + i);
  return spec;
}

}  // namespace fedsim
