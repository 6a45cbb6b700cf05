#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks against the built CLI binary (path in FEDSIM_BIN).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fedsim/data.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* bin = std::getenv("FEDSIM_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "FEDSIM_BIN must point at the fedsim binary");
  return bin;
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "fedsim_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path path = work_dir() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallConfig = R"({
  "dataset": {"type": "synthetic", "classes": 3, "dim": 4, "samples_per_class": 40,
              "spread": 0.3},
  "partition": {"scheme": "iid", "num_clients": 5},
  "model_dims": [4, 8, 8, 3],
  "train": {"epochs": 1, "learning_rate": 0.1, "batch_size": 16},
  "strategy": {"kind": "acsp_fl"},
  "rounds": 6,
  "seed": 11
})";

}  // namespace

TEST_CASE("missing config file exits with the usage code") {
  CHECK(run_cli("run -c /nonexistent/config.json") == 2);
}

TEST_CASE("invalid config exits with the usage code") {
  const auto cfg = write_config("bad.json", R"({"rounds": -3})");
  CHECK(run_cli("run -c " + cfg.string()) == 2);
}

TEST_CASE("unknown flags exit with the usage code") {
  CHECK(run_cli("run --frobnicate") == 2);
  CHECK(run_cli("") == 2);
}

TEST_CASE("run writes reports and is reproducible") {
  const auto cfg = write_config("run.json", kSmallConfig);
  const auto out_a = work_dir() / "run_a";
  const auto out_b = work_dir() / "run_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);

  CHECK(run_cli("run -c " + cfg.string() + " -o " + out_a.string()) == 0);
  CHECK(fs::exists(out_a / "rounds.csv"));
  CHECK(fs::exists(out_a / "clients.csv"));
  CHECK(fs::exists(out_a / "summary.json"));
  CHECK(fs::exists(out_a / "config.json"));

  CHECK(run_cli("run -c " + cfg.string() + " -o " + out_b.string()) == 0);
  CHECK(slurp(out_a / "rounds.csv") == slurp(out_b / "rounds.csv"));
  CHECK(slurp(out_a / "summary.json") == slurp(out_b / "summary.json"));
}

TEST_CASE("run applies --set overrides") {
  const auto cfg = write_config("override.json", kSmallConfig);
  const auto out = work_dir() / "override_out";
  fs::remove_all(out);
  CHECK(run_cli("run -c " + cfg.string() + " -o " + out.string() +
                " --set strategy.kind=full --set rounds=2") == 0);
  const std::string config_copy = slurp(out / "config.json");
  CHECK(config_copy.find("\"kind\": \"full\"") != std::string::npos);
  const std::string rounds = slurp(out / "rounds.csv");
  CHECK(std::count(rounds.begin(), rounds.end(), '\n') == 3);  // header + 2 rounds
}

TEST_CASE("compare needs at least two strategies") {
  const auto cfg = write_config("cmp1.json", kSmallConfig);
  CHECK(run_cli("compare -c " + cfg.string() + " --strategies acsp_fl") == 2);
}

TEST_CASE("compare writes a full baseline row plus per-strategy reports") {
  const auto cfg = write_config("cmp.json", kSmallConfig);
  const auto out = work_dir() / "cmp_out";
  fs::remove_all(out);
  CHECK(run_cli("compare -c " + cfg.string() + " -o " + out.string() +
                " --strategies acsp_fl,random_k") == 0);
  const std::string table = slurp(out / "comparison.csv");
  CHECK(table.find("strategy,mean_acc,total_uplink_bytes,sim_seconds,overhead_reduction,"
                   "efficiency") == 0);
  CHECK(table.find("\nfull,") != std::string::npos);
  CHECK(table.find("\nacsp_fl,") != std::string::npos);
  CHECK(table.find("\nrandom_k,") != std::string::npos);
  CHECK(fs::exists(out / "full" / "summary.json"));
  CHECK(fs::exists(out / "acsp_fl" / "rounds.csv"));
  // the baseline row scores against itself
  CHECK(table.find("\nfull") != std::string::npos);
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);  // full row
  CHECK(line.substr(0, 5) == "full,");
  CHECK(line.find(",0,") != std::string::npos);  // overhead_reduction column
}

TEST_CASE("gen-data emits a loadable csv") {
  const auto cfg = write_config("gen.json", kSmallConfig);
  const auto out_file = work_dir() / "generated.csv";
  fs::remove(out_file);
  CHECK(run_cli("gen-data -c " + cfg.string() + " --out-file " + out_file.string()) == 0);
  REQUIRE(fs::exists(out_file));
  const fedsim::CsvData data = fedsim::load_csv(out_file.string(), fedsim::CsvSchema{});
  CHECK(data.clients.size() == 5);
  CHECK(data.num_classes == 3);
  CHECK(data.feature_dim == 4);
}
