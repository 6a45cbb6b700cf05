#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/nnet.hpp"
#include "fedsim/selection.hpp"

namespace fedsim {

// Collects every validation problem found in a config; what() joins them.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct SyntheticSpec {
  int num_classes = 6;
  int dim = 16;
  int samples_per_class = 200;
  double spread = 0.3;
};

struct DatasetConfig {
  enum class Type { synthetic, csv };
  Type type = Type::synthetic;
  SyntheticSpec synthetic;
  std::string csv_path;
  double csv_test_fraction = 0.2;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PartitionSpec partition;
  std::vector<int> model_dims;  // empty = derive [d, 256, 256, 256, classes]
  TrainConfig train;
  StrategyConfig strategy;
  ShareMode share_mode = ShareMode::full;
  int shared_layers = 1;  // fixed mode
  bool share_from_tail = false;
  Personalization personalization = Personalization::layers;
  int rounds = 100;
  CostModel cost;
  EfficiencyConfig efficiency;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

// Parse + validate a JSON config file. Unknown keys are errors (with a
// nearest-key suggestion); every violation is reported at once. overrides
// are dotted key=value pairs applied after the file parse, e.g.
// "strategy.kind=acsp_fl" or "rounds=50".
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides = {});

// Same pipeline starting from a JSON document body.
ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides = {});

// Full materialized JSON (defaults included); parse_config_text of this text
// reproduces the config exactly.
std::string config_to_json_string(const ExperimentConfig& cfg);

const char* strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_name(const std::string& name);

}  // namespace fedsim
