#include "fedsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

ShareSpec full_spec(int total_layers) {
  ShareSpec spec;
  spec.total_layers = total_layers;
  spec.layer_indices.resize(total_layers);
  for (int i = 0; i < total_layers; ++i) spec.layer_indices[i] = i;
  return spec;
}

ShareSpec spec_for_round(const ServerState& server) {
  const int total = static_cast<int>(server.global_params.layer_count());
  if (server.personalization == Personalization::fine_tune) return full_spec(total);
  switch (server.share_mode) {
    case ShareMode::full:
      return full_spec(total);
    case ShareMode::fixed:
      return make_share_spec(server.fixed_layers, total, server.share_from_tail);
    case ShareMode::dynamic:
      return make_share_spec(dynamic_layer_count(server.prev_mean_accuracy, total), total,
                             server.share_from_tail);
  }
  throw std::invalid_argument("run_round: unknown share mode");
}

TrainConfig per_client_cfg(const TrainConfig& base, int round, int client_id) {
  TrainConfig cfg = base;
  cfg.seed = mix_seed({base.seed, static_cast<std::uint64_t>(round),
                       static_cast<std::uint64_t>(client_id)});
  return cfg;
}

std::vector<int> next_selection(const StrategyConfig& strategy,
                                const std::vector<ClientPerf>& perfs,
                                const std::vector<int>& all_ids, int next_round) {
  std::vector<int> picked;
  switch (strategy.kind) {
    case StrategyKind::full:
      picked = all_ids;
      break;
    case StrategyKind::random_k:
      picked = select_random_k(all_ids, strategy.k_fraction, next_round, strategy.seed);
      break;
    case StrategyKind::poc:
      picked = select_poc(perfs, strategy.k_fraction);
      break;
    case StrategyKind::oort_lite:
      picked = select_oort_lite(perfs, strategy.k_fraction, strategy);
      break;
    case StrategyKind::deev:
    case StrategyKind::acsp_fl:
      picked = select_acsp(perfs, next_round, strategy);
      break;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

ParamSet aggregate(const std::vector<std::pair<ParamSet, long long>>& fragments) {
  if (fragments.empty()) throw std::invalid_argument("aggregate: no fragments");
  long long total = 0;
  for (const auto& [frag, count] : fragments) {
    if (count <= 0) throw std::invalid_argument("aggregate: sample counts must be positive");
    if (frag.layer_count() != fragments.front().first.layer_count())
      throw std::invalid_argument("aggregate: fragment shapes differ");
    for (std::size_t l = 0; l < frag.layer_count(); ++l)
      if (!frag.layers[l].weights.same_shape(fragments.front().first.layers[l].weights) ||
          frag.layers[l].biases.size() != fragments.front().first.layers[l].biases.size())
        throw std::invalid_argument("aggregate: fragment shapes differ");
    total += count;
  }

  ParamSet out = fragments.front().first;
  for (auto& layer : out.layers) {
    std::fill(layer.weights.data.begin(), layer.weights.data.end(), 0.0);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
  }
  for (const auto& [frag, count] : fragments) {
    const double w = static_cast<double>(count);
    for (std::size_t l = 0; l < frag.layer_count(); ++l) {
      auto& dst = out.layers[l];
      const auto& src = frag.layers[l];
      for (std::size_t i = 0; i < src.weights.data.size(); ++i)
        dst.weights.data[i] += w * src.weights.data[i];
      for (std::size_t i = 0; i < src.biases.size(); ++i) dst.biases[i] += w * src.biases[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(total);
  for (auto& layer : out.layers) {
    for (double& v : layer.weights.data) v *= inv;
    for (double& v : layer.biases) v *= inv;
  }
  return out;
}

ParamSet personalize(const ClientState& client, const ParamSet& global_fragment,
                     const ShareSpec& spec) {
  ShareSpec local_spec;
  local_spec.total_layers = spec.total_layers;
  local_spec.layer_indices = spec.complement();
  return merge_layers(global_fragment, slice_layers(client.local_params, local_spec), spec);
}

ModelChoice choose_model(double local_loss, double global_loss) {
  if (std::isnan(local_loss) || std::isnan(global_loss))
    throw std::invalid_argument("choose_model: NaN loss");
  if (local_loss < 0.0 || global_loss < 0.0)
    throw std::invalid_argument("choose_model: losses must be >= 0");
  return local_loss <= global_loss ? ModelChoice::local : ModelChoice::global;
}

TrainOutcome client_train(ClientState& client, const ParamSet& global_fragment,
                          const ShareSpec& spec, const TrainConfig& cfg) {
  const ParamSet composed = personalize(client, global_fragment, spec);
  FitResult fit = sgd_fit(composed, client.split.train, cfg);
  client.local_params = std::move(fit.params);
  return {slice_layers(client.local_params, spec),
          static_cast<long long>(client.split.train.size())};
}

std::vector<ClientPerf> distributed_evaluate(std::vector<ClientState>& clients,
                                             const ParamSet& global_fragment,
                                             const ShareSpec& spec) {
  std::vector<ClientPerf> perfs;
  perfs.reserve(clients.size());
  for (auto& client : clients) {
    const EvalResult eval = evaluate(personalize(client, global_fragment, spec),
                                     client.split.test);
    client.last_accuracy = eval.accuracy;
    client.last_loss = eval.loss;
    perfs.push_back({client.client_id, eval.accuracy, eval.loss, client.last_round_duration});
  }
  return perfs;
}

RoundLog run_round(ServerState& server, std::vector<ClientState>& clients,
                   const CostModel& cost, const TrainConfig& train_cfg) {
  if (server.selected.empty()) throw std::invalid_argument("run_round: no clients selected");
  if (clients.empty()) throw std::invalid_argument("run_round: no clients");
  if (cost.bytes_per_param <= 0 || !(cost.bandwidth_bytes_per_sec > 0.0) ||
      !(cost.client_samples_per_sec > 0.0))
    throw std::invalid_argument("run_round: cost model fields must be positive");

  // Stage everything; commit only after the full round succeeded.
  std::vector<ClientState> staged = clients;
  std::map<int, std::size_t> by_id;
  for (std::size_t i = 0; i < staged.size(); ++i) by_id.emplace(staged[i].client_id, i);
  if (by_id.size() != staged.size())
    throw std::invalid_argument("run_round: duplicate client ids");

  std::vector<int> selected = server.selected;
  std::sort(selected.begin(), selected.end());
  for (int id : selected)
    if (!by_id.count(id))
      throw std::invalid_argument("run_round: selected id " + std::to_string(id) + " unknown");

  const ShareSpec spec = spec_for_round(server);
  const ParamSet fragment = slice_layers(server.global_params, spec);
  const long long fragment_params = static_cast<long long>(fragment.param_count());
  const bool fine_tune = server.personalization == Personalization::fine_tune;

  // local training on the selected set; results consumed in ascending id order
  std::vector<std::pair<ParamSet, long long>> uploads;
  uploads.reserve(selected.size());
  for (int id : selected) {
    ClientState& client = staged[by_id.at(id)];
    const TrainConfig cfg = per_client_cfg(train_cfg, server.round, id);
    if (fine_tune) {
      const EvalResult local_eval = evaluate(client.local_params, client.split.test);
      const EvalResult global_eval = evaluate(server.global_params, client.split.test);
      const ParamSet& base = choose_model(local_eval.loss, global_eval.loss) == ModelChoice::local
                                 ? client.local_params
                                 : server.global_params;
      FitResult fit = sgd_fit(base, client.split.train, cfg);
      client.local_params = std::move(fit.params);
      uploads.emplace_back(client.local_params,
                           static_cast<long long>(client.split.train.size()));
    } else {
      TrainOutcome outcome = client_train(client, fragment, spec, cfg);
      uploads.emplace_back(std::move(outcome.fragment), outcome.sample_count);
    }
  }

  const ParamSet aggregated = aggregate(uploads);
  ParamSet new_global = server.global_params;
  for (std::size_t i = 0; i < spec.layer_indices.size(); ++i)
    new_global.layers[spec.layer_indices[i]] = aggregated.layers[i];

  // distributed evaluation of the fresh aggregate on every client
  const long long frag_bytes = fragment_params * cost.bytes_per_param;
  double round_seconds = 0.0;
  for (int id : selected) {
    ClientState& client = staged[by_id.at(id)];
    const double duration =
        2.0 * static_cast<double>(frag_bytes) / cost.bandwidth_bytes_per_sec +
        static_cast<double>(train_cfg.epochs) *
            static_cast<double>(client.split.train.size()) / cost.client_samples_per_sec;
    client.last_round_duration = duration;
    round_seconds = std::max(round_seconds, duration);
  }

  std::vector<ClientPerf> perfs;
  if (fine_tune) {
    perfs.reserve(staged.size());
    for (auto& client : staged) {
      const EvalResult local_eval = evaluate(client.local_params, client.split.test);
      const EvalResult global_eval = evaluate(new_global, client.split.test);
      const EvalResult& chosen = choose_model(local_eval.loss, global_eval.loss) ==
                                         ModelChoice::local
                                     ? local_eval
                                     : global_eval;
      client.last_accuracy = chosen.accuracy;
      client.last_loss = chosen.loss;
      perfs.push_back({client.client_id, chosen.accuracy, chosen.loss,
                       client.last_round_duration});
    }
  } else {
    const ParamSet eval_fragment = slice_layers(new_global, spec);
    perfs = distributed_evaluate(staged, eval_fragment, spec);
  }

  RoundLog log;
  log.round = server.round;
  log.selected = selected;
  log.shared_layers = static_cast<int>(spec.layer_indices.size());
  log.fragment_params = fragment_params;
  log.accuracies.reserve(perfs.size());
  double sum = 0.0, mn = perfs.front().accuracy, mx = perfs.front().accuracy;
  for (const auto& p : perfs) {
    log.accuracies.push_back(p.accuracy);
    sum += p.accuracy;
    mn = std::min(mn, p.accuracy);
    mx = std::max(mx, p.accuracy);
  }
  log.mean_acc = sum / static_cast<double>(perfs.size());
  log.min_acc = mn;
  log.max_acc = mx;
  log.cost = {server.round, static_cast<long long>(selected.size()) * frag_bytes,
              static_cast<long long>(selected.size()) * frag_bytes, round_seconds,
              static_cast<int>(selected.size())};

  std::vector<int> all_ids;
  all_ids.reserve(staged.size());
  for (const auto& c : staged) all_ids.push_back(c.client_id);
  std::sort(all_ids.begin(), all_ids.end());
  std::vector<int> next = next_selection(server.strategy, perfs, all_ids, server.round + 1);

  // commit
  clients = std::move(staged);
  server.global_params = std::move(new_global);
  server.prev_mean_accuracy = log.mean_acc;
  server.selected = std::move(next);
  server.round += 1;
  return log;
}

}  // namespace fedsim
