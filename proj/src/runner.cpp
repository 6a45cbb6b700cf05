#include "fedsim/runner.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace fedsim {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_run_outputs(const RunOutput& out, const std::filesystem::path& out_dir) {
  write_reports(out.summary, out.result.logs, out_dir);
  write_text(out_dir / "config.json", config_to_json_string(out.config));
}

std::vector<CompareRow> compare_strategies(const ExperimentConfig& base,
                                           const std::vector<std::string>& strategy_names,
                                           const std::filesystem::path& out_dir) {
  if (strategy_names.size() < 2)
    throw ConfigError({"compare: need at least 2 strategies"});

  // FedAvg-full is the overhead baseline and always runs first.
  std::vector<std::string> ordered{"full"};
  for (const auto& name : strategy_names) {
    strategy_kind_from_name(name);  // unknown names fail fast
    if (std::find(ordered.begin(), ordered.end(), name) == ordered.end())
      ordered.push_back(name);
  }

  std::vector<CompareRow> rows;
  double baseline_time = 0.0;
  for (const auto& name : ordered) {
    ExperimentConfig cfg = base;
    cfg.strategy.kind = strategy_kind_from_name(name);
    cfg.out_dir = (out_dir / name).string();
    if (cfg.strategy.kind != StrategyKind::acsp_fl) {
      // literature baselines exchange the whole model and keep no personal piece
      cfg.share_mode = ShareMode::full;
      cfg.personalization = Personalization::layers;
    }

    RunOutput run = execute_run(cfg);
    if (name == "full") baseline_time = run.summary.convergence_time_seconds;
    const double red = overhead_reduction(run.summary.convergence_time_seconds, baseline_time);
    run.summary.efficiency = efficiency(run.summary.mean_accuracy, red, cfg.efficiency);
    write_run_outputs(run, out_dir / name);

    rows.push_back({name, run.summary.mean_accuracy, run.summary.total_uplink_bytes,
                    run.summary.convergence_time_seconds, red, *run.summary.efficiency});
  }

  write_text(out_dir / "comparison.csv", comparison_csv_text(rows));
  return rows;
}

std::string comparison_csv_text(const std::vector<CompareRow>& rows) {
  std::string text =
      "strategy,mean_acc,total_uplink_bytes,sim_seconds,overhead_reduction,efficiency\n";
  for (const auto& r : rows) {
    text += r.strategy + ',' + fmt(r.mean_acc) + ',' + std::to_string(r.total_uplink_bytes) +
            ',' + fmt(r.sim_seconds) + ',' + fmt(r.overhead_red) + ',' +
            fmt(r.efficiency_value) + "\n";
  }
  return text;
}

}  // namespace fedsim
