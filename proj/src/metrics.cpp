#include "fedsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fedsim {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

}  // namespace

double overhead_reduction(double solution_time, double baseline_time) {
  if (!(baseline_time > 0.0))
    throw std::invalid_argument("overhead_reduction: baseline_time must be > 0");
  return std::clamp(1.0 - solution_time / baseline_time, 0.0, 1.0);
}

double efficiency(double mean_accuracy, double overhead_red, const EfficiencyConfig& cfg) {
  require_unit_interval(mean_accuracy, "efficiency: mean_accuracy");
  require_unit_interval(overhead_red, "efficiency: overhead_red");
  require_unit_interval(cfg.alpha, "efficiency: alpha");
  require_unit_interval(cfg.beta, "efficiency: beta");
  return cfg.alpha * mean_accuracy + cfg.beta * overhead_red;
}

RunSummary summarize(const std::vector<RoundLog>& logs, const std::vector<ClientPerf>& final_perfs,
                     const EfficiencyConfig& cfg, std::optional<double> baseline_time) {
  if (logs.empty()) throw std::invalid_argument("summarize: no round logs");
  if (final_perfs.empty()) throw std::invalid_argument("summarize: no client reports");

  RunSummary s;
  double sum = 0.0;
  s.min_accuracy = final_perfs.front().accuracy;
  s.max_accuracy = final_perfs.front().accuracy;
  for (const auto& p : final_perfs) {
    s.accuracy_per_client[p.client_id] = p.accuracy;
    s.selection_counts[p.client_id] = 0;
    s.uplink_bytes_per_client[p.client_id] = 0;
    sum += p.accuracy;
    s.min_accuracy = std::min(s.min_accuracy, p.accuracy);
    s.max_accuracy = std::max(s.max_accuracy, p.accuracy);
  }
  s.mean_accuracy = sum / static_cast<double>(final_perfs.size());

  for (const auto& log : logs) {
    s.total_uplink_bytes += log.cost.uplink_bytes;
    s.total_downlink_bytes += log.cost.downlink_bytes;
    s.convergence_time_seconds += log.cost.simulated_round_seconds;
    const long long per_client =
        log.selected.empty() ? 0 : log.cost.uplink_bytes / static_cast<long long>(log.selected.size());
    for (int id : log.selected) {
      s.selection_counts[id] += 1;
      s.uplink_bytes_per_client[id] += per_client;
    }
  }
  if (baseline_time)
    s.efficiency = efficiency(s.mean_accuracy,
                              overhead_reduction(s.convergence_time_seconds, *baseline_time), cfg);
  return s;
}

std::string summary_to_json_string(const RunSummary& s) {
  nlohmann::json j;
  j["mean_accuracy"] = s.mean_accuracy;
  j["min_accuracy"] = s.min_accuracy;
  j["max_accuracy"] = s.max_accuracy;
  j["total_uplink_bytes"] = s.total_uplink_bytes;
  j["total_downlink_bytes"] = s.total_downlink_bytes;
  j["convergence_time_seconds"] = s.convergence_time_seconds;
  for (const auto& [id, acc] : s.accuracy_per_client)
    j["accuracy_per_client"][std::to_string(id)] = acc;
  for (const auto& [id, n] : s.selection_counts) j["selection_counts"][std::to_string(id)] = n;
  for (const auto& [id, b] : s.uplink_bytes_per_client)
    j["uplink_bytes_per_client"][std::to_string(id)] = b;
  if (s.efficiency) j["efficiency"] = *s.efficiency;
  return j.dump(2) + "\n";
}

RunSummary summary_from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunSummary s;
  s.mean_accuracy = j.at("mean_accuracy").get<double>();
  s.min_accuracy = j.at("min_accuracy").get<double>();
  s.max_accuracy = j.at("max_accuracy").get<double>();
  s.total_uplink_bytes = j.at("total_uplink_bytes").get<long long>();
  s.total_downlink_bytes = j.at("total_downlink_bytes").get<long long>();
  s.convergence_time_seconds = j.at("convergence_time_seconds").get<double>();
  for (const auto& [key, value] : j.at("accuracy_per_client").items())
    s.accuracy_per_client[std::stoi(key)] = value.get<double>();
  for (const auto& [key, value] : j.at("selection_counts").items())
    s.selection_counts[std::stoi(key)] = value.get<int>();
  for (const auto& [key, value] : j.at("uplink_bytes_per_client").items())
    s.uplink_bytes_per_client[std::stoi(key)] = value.get<long long>();
  if (j.contains("efficiency")) s.efficiency = j.at("efficiency").get<double>();
  return s;
}

void write_reports(const RunSummary& summary, const std::vector<RoundLog>& logs,
                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("write_reports: cannot create " + out_dir.string() + ": " +
                             ec.message());

  auto open = [&](const char* name) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("write_reports: cannot write " + (out_dir / name).string());
    return out;
  };

  {
    std::ofstream out = open("rounds.csv");
    out << "round,selected_count,shared_layers,mean_acc,min_acc,max_acc,uplink_bytes,"
           "downlink_bytes,sim_seconds\n";
    for (const auto& log : logs)
      out << log.round << ',' << log.cost.selected_count << ',' << log.shared_layers << ','
          << fmt(log.mean_acc) << ',' << fmt(log.min_acc) << ',' << fmt(log.max_acc) << ','
          << log.cost.uplink_bytes << ',' << log.cost.downlink_bytes << ','
          << fmt(log.cost.simulated_round_seconds) << "\n";
    if (!out) throw std::runtime_error("write_reports: rounds.csv write failed");
  }
  {
    std::ofstream out = open("clients.csv");
    out << "client_id,final_accuracy,times_selected,uplink_bytes\n";
    for (const auto& [id, acc] : summary.accuracy_per_client)
      out << id << ',' << fmt(acc) << ',' << summary.selection_counts.at(id) << ','
          << summary.uplink_bytes_per_client.at(id) << "\n";
    if (!out) throw std::runtime_error("write_reports: clients.csv write failed");
  }
  {
    std::ofstream out = open("summary.json");
    out << summary_to_json_string(summary);
    if (!out) throw std::runtime_error("write_reports: summary.json write failed");
  }
}

}  // namespace fedsim
