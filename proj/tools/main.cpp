#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedsim/config.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void print_error(const std::string& message, int code) {
  nlohmann::json j{{"error", message}, {"exit", code}};
  std::cerr << j.dump() << "\n";
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seed;

  std::vector<std::string> final_overrides() const {
    std::vector<std::string> all = overrides;
    if (!out_dir.empty()) all.push_back("out_dir=" + out_dir);
    if (!seed.empty()) all.push_back("seed=" + seed);
    return all;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--set", args.overrides, "override a config key, e.g. strategy.kind=acsp_fl");
  cmd->add_option("-o,--out-dir", args.out_dir, "output directory override");
  cmd->add_option("--seed", args.seed, "seed override");
}

fedsim::ExperimentConfig load(const CommonArgs& args) {
  if (!std::filesystem::exists(args.config_path))
    throw fedsim::ConfigError({"config file not found: " + args.config_path});
  return fedsim::parse_config(args.config_path, args.final_overrides());
}

int cmd_run(const CommonArgs& args) {
  const fedsim::ExperimentConfig cfg = load(args);
  fedsim::RunOutput out = fedsim::execute_run(cfg);
  fedsim::write_run_outputs(out, cfg.out_dir);
  std::cout << "mean_acc=" << out.summary.mean_accuracy
            << " uplink_mb=" << static_cast<double>(out.summary.total_uplink_bytes) / 1e6
            << " sim_seconds=" << out.summary.convergence_time_seconds << " out=" << cfg.out_dir
            << "\n";
  return kExitOk;
}

int cmd_compare(const CommonArgs& args, const std::string& strategies) {
  const fedsim::ExperimentConfig cfg = load(args);
  const std::vector<std::string> names = split_csv_list(strategies);
  if (names.size() < 2) throw fedsim::ConfigError({"compare: need at least 2 strategies"});
  const auto rows = fedsim::compare_strategies(cfg, names, cfg.out_dir);
  for (const auto& row : rows)
    std::cout << row.strategy << ": mean_acc=" << row.mean_acc
              << " uplink_mb=" << static_cast<double>(row.total_uplink_bytes) / 1e6
              << " efficiency=" << row.efficiency_value << "\n";
  std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / "comparison.csv").string()
            << "\n";
  return kExitOk;
}

int cmd_gen_data(const CommonArgs& args, std::string out_path) {
  const fedsim::ExperimentConfig cfg = load(args);
  if (cfg.dataset.type != fedsim::DatasetConfig::Type::synthetic)
    throw fedsim::ConfigError({"gen-data: dataset.type must be 'synthetic'"});
  const auto clients = fedsim::materialize_clients(cfg);
  if (out_path.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    out_path = (std::filesystem::path(cfg.out_dir) / "data.csv").string();
  }
  fedsim::write_csv(out_path, clients);
  std::cout << "wrote " << out_path << " (" << clients.size() << " clients)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated learning simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run = app.add_subcommand("run", "execute one experiment and write reports");
  add_common(run, run_args);

  CommonArgs cmp_args;
  std::string strategies;
  CLI::App* compare = app.add_subcommand("compare", "run several strategies against FedAvg-full");
  add_common(compare, cmp_args);
  compare->add_option("--strategies", strategies, "comma-separated strategy kinds")->required();

  CommonArgs gen_args;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-data", "write the configured synthetic dataset as CSV");
  add_common(gen, gen_args);
  gen->add_option("--out-file", gen_out, "output CSV path (default <out_dir>/data.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (compare->parsed()) return cmd_compare(cmp_args, strategies);
    if (gen->parsed()) return cmd_gen_data(gen_args, gen_out);
    print_error("no subcommand", kExitUsage);
    return kExitUsage;
  } catch (const fedsim::ConfigError& e) {
    print_error(e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error(e.what(), kExitRuntime);
    return kExitRuntime;
  }
}
